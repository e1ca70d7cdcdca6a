#pragma once

// Cross-convolution residuals, perturbation Jacobians and the streamed
// Gauss-Newton normal equations.
//
// The residual of shot i, receiver j is F_ij * d_ik - d_ij * F_ik, where F is
// predicted data, d observed data and k the reference receiver. Its Jacobian
// replaces F by dF/dm_p. Blocks of J are produced per (shot, receiver) pair
// and folded into J^T J and J^T r without ever storing J.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "seisgn/forward.hpp"
#include "seisgn/multires.hpp"
#include "seisgn/parameters.hpp"

namespace seisgn {

struct ResidualVector {
  std::size_t ns = 0;
  std::size_t nr = 0;
  std::size_t nt_conv = 0;
  std::vector<double> values;  // index ((shot * nr) + receiver) * nt_conv + t

  std::size_t index(std::size_t shot, std::size_t receiver, std::size_t t) const {
    return (shot * nr + receiver) * nt_conv + t;
  }
  std::span<const double> segment(std::size_t shot, std::size_t receiver) const {
    return {values.data() + index(shot, receiver, 0), nt_conv};
  }
};

ResidualVector modified_residual(std::span<const ShotRecord> estimated,
                                 std::span<const ShotRecord> observed, std::size_t reference);
ResidualVector modified_residual(const ShotRecord& estimated, const ShotRecord& observed,
                                 std::size_t reference);

/// Perturbation size max(fraction * |value|, floor).
struct PerturbationRule {
  enum class Scheme { Forward, Central };
  double fraction = 0.01;
  double floor = 1.0;
  Scheme scheme = Scheme::Forward;

  double step(double value) const;
  void validate() const;
};

/// Rows of J for one (shot, receiver) pair: nt_conv x active parameter count.
struct JacobianBlock {
  std::size_t shot = 0;
  std::size_t receiver = 0;
  Eigen::MatrixXd rows;
};

using BlockSink = std::function<void(const JacobianBlock&)>;

struct JacobianProblem {
  const ParameterizedModel* model = nullptr;
  const ZoneDecomposition* zones = nullptr;  // over the parameter grid
  const Survey* survey = nullptr;
  std::span<const ShotRecord> baseline;  // F(m), one per shot
  std::span<const ShotRecord> observed;  // d, one per shot
  PerturbationRule rule;
  double vp_cap = std::numeric_limits<double>::infinity();
};

/// Perturbation step actually applied to coarse cell p (negative when the
/// forward direction would leave the admissible model set, zero when neither
/// direction is admissible; such a cell gets a zero column).
double perturbation_step(const JacobianProblem& problem, ParameterClass cls, std::size_t coarse);

/// Raw sensitivity dF/dm_p of one shot for every coarse parameter, in
/// parameter order. Perturbed solves run concurrently.
std::vector<ShotRecord> shot_sensitivities(const JacobianProblem& problem, ParameterClass cls,
                                           std::size_t shot);

/// Emits blocks in ascending (shot, receiver) order. Only one shot's raw
/// sensitivities and one block are alive at a time.
void stream_jacobian(const JacobianProblem& problem, ParameterClass cls, const BlockSink& sink);

/// Streamed accumulation of H_a = sum J_b^T J_b and g = sum J_b^T r_b.
class NormalEquations {
 public:
  explicit NormalEquations(std::size_t parameters);

  void add(const JacobianBlock& block);
  void add(const JacobianBlock& block, std::span<const double> residual_segment);

  /// Symmetric H_a (lower triangle mirrored, so exactly symmetric).
  Eigen::MatrixXd hessian() const;
  const Eigen::VectorXd& gradient() const { return gradient_; }
  std::size_t blocks() const { return blocks_; }
  std::size_t parameters() const { return static_cast<std::size_t>(lower_.rows()); }

 private:
  Eigen::MatrixXd lower_;
  Eigen::VectorXd gradient_;
  std::size_t blocks_ = 0;
};

Eigen::MatrixXd accumulate_hessian(std::span<const JacobianBlock> blocks);
Eigen::VectorXd accumulate_gradient(std::span<const JacobianBlock> blocks, const ResidualVector& r);

/// Dense J in residual row order (testing aid; defeats the streaming).
Eigen::MatrixXd assemble_dense(std::span<const JacobianBlock> blocks, std::size_t ns, std::size_t nr);

}  // namespace seisgn
