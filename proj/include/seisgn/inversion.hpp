#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "seisgn/forward.hpp"
#include "seisgn/jacobian.hpp"
#include "seisgn/multires.hpp"
#include "seisgn/parameters.hpp"

namespace seisgn {

/// Weights of the Laplacian (lambda1) and damping (lambda2) penalties. Both
/// are relative to the mean diagonal of H_a, which makes them independent of
/// the data amplitude.
struct RegularizationConfig {
  double lambda1 = 0.05;
  double lambda2 = 0.0005;
  void validate() const;
};

/// E_d = 0.5 * |r|^2.
double misfit(std::span<const double> residual);
double misfit(const ResidualVector& residual);

/// Five-point Laplacian over the coarse cells of each zone: -4 on the
/// diagonal and +1 per E/W/N/S neighbor inside the same zone.
Eigen::SparseMatrix<double> laplacian_matrix(const ZoneDecomposition& zones);

/// H_a + s (lambda1 P^T P + lambda2 I) with s = trace(H_a) / M (s = 1 when H_a = 0).
Eigen::MatrixXd regularized_normal_matrix(const Eigen::MatrixXd& hessian,
                                          const Eigen::SparseMatrix<double>& laplacian,
                                          const RegularizationConfig& reg);

struct GaussNewtonStep {
  Eigen::VectorXd direction;  // g = N^{-1} J^T r
  double alpha = 0.0;
  Eigen::VectorXd next;  // m - alpha g
};

/// Regularized Gauss-Newton step with the exact line search of the
/// linearized problem: alpha = (Jg)^T r / |Jg|^2 = g^T (J^T r) / (g^T H_a g).
/// Throws NumericalError when the normal matrix is not positive definite.
GaussNewtonStep gauss_newton_update(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                                    const Eigen::SparseMatrix<double>& laplacian,
                                    const RegularizationConfig& reg, const Eigen::VectorXd& current);

struct FrequencySchedule {
  std::vector<double> frequencies{10.0, 15.0, 20.0};
  std::size_t max_iterations = 20;
  double plateau_tolerance = 1e-3;
  void validate() const;
};

enum class JacobianMode {
  Direct,    // perturb each coarse cell as a whole
  Restrict,  // perturb fine cells, then sum columns per coarse cell
};

struct InversionSettings {
  RegularizationConfig regularization;
  PerturbationRule perturbation;
  ZoneDecomposition zones;  // over the parameter grid
  FrequencySchedule schedule;
  JacobianMode jacobian_mode = JacobianMode::Direct;
  double vp_cap = std::numeric_limits<double>::infinity();  // keeps dt stable
  bool record_wall_time = false;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1 = misfit of the stage's starting model
  double fc = 0.0;
  double misfit = 0.0;
  double normalized_misfit = 0.0;
  double alpha = 0.0;  // Vs step length
  double alpha_vp = 0.0;
  double wall_seconds = 0.0;
  bool retried = false;
};

struct InversionState {
  ParameterizedModel model;
  std::size_t stage = 0;
  std::vector<IterationRecord> history;  // all stages, in order
};

/// Streams the Jacobian of one class and folds it into H_a and J^T r.
NormalEquations assemble_normal_equations(const JacobianProblem& problem, ParameterClass cls,
                                          const ResidualVector& residual, JacobianMode mode);

/// Clamps to the admissible set: 0 <= vs, vp >= sqrt(2) vs + 1, vp <= vp_cap.
void project_admissible(ParameterizedModel& model, double vp_cap);

using IterationCallback = std::function<void(const IterationRecord&, const InversionState&)>;

/// Gauss-Newton iterations at one center frequency until max_iterations
/// updates or a relative misfit drop below the plateau tolerance. Vs and Vp
/// directions come from their own normal systems; their step lengths are
/// fitted jointly to the linearized residual (one probe solve per class).
void invert_stage(InversionState& state, std::span<const ShotRecord> observed, const Survey& survey,
                  const InversionSettings& settings, const IterationCallback& on_iteration = {});

/// Runs the stages in ascending frequency, each starting from the previous
/// result. `observed[s]` and `surveys[s]` belong to schedule frequency s.
InversionState frequency_continuation(const ParameterizedModel& initial,
                                      std::span<const std::vector<ShotRecord>> observed,
                                      std::span<const Survey> surveys,
                                      const InversionSettings& settings,
                                      const IterationCallback& on_iteration = {},
                                      const std::function<void(const InversionState&)>& on_stage = {});

}  // namespace seisgn
