#include "seisgn/inversion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "seisgn/error.hpp"

namespace seisgn {

void RegularizationConfig::validate() const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw ValidationError("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw ValidationError("lambda2 must be >= 0");
}

double misfit(std::span<const double> residual) {
  double sum = 0.0;
  for (double r : residual) sum += r * r;
  return 0.5 * sum;
}

double misfit(const ResidualVector& residual) { return misfit(residual.values); }

Eigen::SparseMatrix<double> laplacian_matrix(const ZoneDecomposition& zones) {
  const auto n = static_cast<Eigen::Index>(zones.coarse_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 5);
  for (const Zone& z : zones.zones()) {
    for (std::size_t row = 0; row < z.coarse_rows; ++row) {
      for (std::size_t col = 0; col < z.coarse_cols; ++col) {
        const auto c = static_cast<Eigen::Index>(z.coarse_offset + row * z.coarse_cols + col);
        triplets.emplace_back(c, c, -4.0);
        auto link = [&](std::size_t r, std::size_t q) {
          triplets.emplace_back(c, static_cast<Eigen::Index>(z.coarse_offset + r * z.coarse_cols + q), 1.0);
        };
        if (col > 0) link(row, col - 1);
        if (col + 1 < z.coarse_cols) link(row, col + 1);
        if (row > 0) link(row - 1, col);
        if (row + 1 < z.coarse_rows) link(row + 1, col);
      }
    }
  }
  Eigen::SparseMatrix<double> p(n, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return p;
}

Eigen::MatrixXd regularized_normal_matrix(const Eigen::MatrixXd& hessian,
                                          const Eigen::SparseMatrix<double>& laplacian,
                                          const RegularizationConfig& reg) {
  reg.validate();
  const Eigen::Index m = hessian.rows();
  if (hessian.cols() != m || laplacian.rows() != m || laplacian.cols() != m) {
    throw ValidationError("regularized_normal_matrix: H_a and P sizes differ");
  }
  const double trace = hessian.trace();
  const double scale = trace > 0.0 ? trace / static_cast<double>(m) : 1.0;
  const Eigen::SparseMatrix<double> ptp = laplacian.transpose() * laplacian;
  Eigen::MatrixXd n = hessian + (reg.lambda1 * scale) * Eigen::MatrixXd(ptp);
  n.diagonal().array() += reg.lambda2 * scale;
  return n;
}

GaussNewtonStep gauss_newton_update(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                                    const Eigen::SparseMatrix<double>& laplacian,
                                    const RegularizationConfig& reg, const Eigen::VectorXd& current) {
  if (gradient.size() != hessian.rows() || current.size() != hessian.rows()) {
    throw ValidationError("gauss_newton_update: gradient/model length does not match H_a");
  }
  const Eigen::MatrixXd normal = regularized_normal_matrix(hessian, laplacian, reg);
  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("regularized normal matrix is not positive definite; increase lambda1/lambda2");
  }
  GaussNewtonStep step;
  step.direction = llt.solve(gradient);
  if (!step.direction.allFinite()) throw NumericalError("Gauss-Newton direction is not finite");
  const double num = step.direction.dot(gradient);
  const double den = step.direction.dot(hessian * step.direction);
  if (num == 0.0) {
    step.alpha = 0.0;
  } else {
    step.alpha = num / den;
    if (!std::isfinite(step.alpha)) throw NumericalError("step length is not finite");
  }
  step.next = current - step.alpha * step.direction;
  return step;
}

void FrequencySchedule::validate() const {
  if (frequencies.empty()) throw ValidationError("frequency schedule is empty");
  for (std::size_t s = 0; s < frequencies.size(); ++s) {
    if (!(frequencies[s] > 0.0)) throw ValidationError("frequencies must be positive");
    if (s > 0 && !(frequencies[s] > frequencies[s - 1])) {
      throw ValidationError("frequencies must be strictly increasing");
    }
  }
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(plateau_tolerance >= 0.0)) throw ValidationError("plateau_tolerance must be >= 0");
}

NormalEquations assemble_normal_equations(const JacobianProblem& problem, ParameterClass cls,
                                          const ResidualVector& residual, JacobianMode mode) {
  const ZoneDecomposition& zones = *problem.zones;
  NormalEquations ne(zones.coarse_count());
  if (mode == JacobianMode::Direct || zones.is_identity()) {
    stream_jacobian(problem, cls, [&](const JacobianBlock& b) {
      ne.add(b, residual.segment(b.shot, b.receiver));
    });
    return ne;
  }
  const ZoneDecomposition fine =
      ZoneDecomposition::identity(zones.fine_nx(), zones.fine_nz());
  JacobianProblem fine_problem = problem;
  fine_problem.zones = &fine;
  stream_jacobian(fine_problem, cls, [&](const JacobianBlock& b) {
    const JacobianBlock coarse{b.shot, b.receiver, restrict_jacobian(b.rows, zones)};
    ne.add(coarse, residual.segment(b.shot, b.receiver));
  });
  return ne;
}

void project_admissible(ParameterizedModel& model, double vp_cap) {
  const double vs_cap = (vp_cap - 1.0) / std::numbers::sqrt2;
  auto vs = model.vs.values();
  auto vp = model.vp.values();
  for (std::size_t f = 0; f < vs.size(); ++f) {
    vs[f] = std::clamp(vs[f], 0.0, vs_cap);
    vp[f] = std::clamp(vp[f], std::numbers::sqrt2 * vs[f] + 1.0, vp_cap);
  }
}

namespace {

struct Evaluation {
  std::vector<ShotRecord> records;
  ResidualVector residual;
  double misfit = 0.0;
};

Evaluation evaluate(const ParameterizedModel& model, std::span<const ShotRecord> observed,
                    const Survey& survey) {
  Evaluation e;
  e.records = run_survey(model.fd_model(), survey);
  e.residual = modified_residual(e.records, observed, survey.acquisition.reference_receiver);
  e.misfit = misfit(e.residual);
  return e;
}

struct ClassStep {
  ParameterClass cls;
  Eigen::VectorXd direction;
  double alpha = 0.0;
};

ParameterizedModel apply_steps(const ParameterizedModel& model, std::span<const ClassStep> steps,
                               const ZoneDecomposition& zones, double scale, double vp_cap) {
  ParameterizedModel next = model;
  for (const ClassStep& s : steps) {
    auto values = next.field(s.cls).values();
    for (std::size_t f = 0; f < values.size(); ++f) {
      values[f] -= scale * s.alpha * s.direction[static_cast<Eigen::Index>(zones.coarse_of(f))];
    }
  }
  project_admissible(next, vp_cap);
  return next;
}

// Linearized residual change J g of one class along its direction, from a
// directional forward difference sized like a parameter perturbation.
Eigen::VectorXd directional_change(const ParameterizedModel& model, const ClassStep& step,
                                   const ZoneDecomposition& zones, const Evaluation& current,
                                   std::span<const ShotRecord> observed, const Survey& survey,
                                   const InversionSettings& settings) {
  const Eigen::Index n = static_cast<Eigen::Index>(current.residual.values.size());
  const double gmax = step.direction.lpNorm<Eigen::Infinity>();
  if (gmax == 0.0) return Eigen::VectorXd::Zero(n);
  const auto values = model.field(step.cls).values();
  double mean = 0.0;
  for (double v : values) mean += std::abs(v);
  mean /= static_cast<double>(values.size());
  const double eps = settings.perturbation.step(mean) / gmax;
  const ClassStep unit{step.cls, step.direction, 1.0};
  const Evaluation probe = evaluate(apply_steps(model, std::span(&unit, 1), zones, eps, settings.vp_cap),
                                    observed, survey);
  const Eigen::Map<const Eigen::VectorXd> r0(current.residual.values.data(), n);
  const Eigen::Map<const Eigen::VectorXd> r1(probe.residual.values.data(), n);
  return (r0 - r1) / eps;
}

// Step lengths minimizing |r - sum_c alpha_c J_c g_c| over both classes at
// once. Reduces to the per-class formula when the classes do not interact.
void joint_step_lengths(std::vector<ClassStep>& steps, const ParameterizedModel& model,
                        const ZoneDecomposition& zones, const Evaluation& current,
                        std::span<const ShotRecord> observed, const Survey& survey,
                        const InversionSettings& settings) {
  const std::size_t k = steps.size();
  std::vector<Eigen::VectorXd> u;
  for (const ClassStep& s : steps) {
    u.push_back(directional_change(model, s, zones, current, observed, survey, settings));
  }
  const Eigen::Map<const Eigen::VectorXd> r(current.residual.values.data(),
                                            static_cast<Eigen::Index>(current.residual.values.size()));
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd b(k);
  for (std::size_t i = 0; i < k; ++i) {
    b[static_cast<Eigen::Index>(i)] = u[i].dot(r);
    for (std::size_t j = 0; j < k; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u[i].dot(u[j]);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  const double cond_floor = 1e-10 * a.diagonal().maxCoeff();
  if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > cond_floor) {
    const Eigen::VectorXd alpha = ldlt.solve(b);
    if (alpha.allFinite()) {
      for (std::size_t i = 0; i < k; ++i) steps[i].alpha = alpha[static_cast<Eigen::Index>(i)];
      return;
    }
  }
  // Degenerate pair: keep the per-class ratios and fit one common scale.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(r.size());
  for (std::size_t i = 0; i < k; ++i) w += steps[i].alpha * u[i];
  const double ww = w.squaredNorm();
  const double t = ww > 0.0 ? w.dot(r) / ww : 0.0;
  for (ClassStep& s : steps) s.alpha *= t;
}

}  // namespace

void invert_stage(InversionState& state, std::span<const ShotRecord> observed, const Survey& survey,
                  const InversionSettings& settings, const IterationCallback& on_iteration) {
  settings.regularization.validate();
  settings.schedule.validate();
  settings.perturbation.validate();
  const ZoneDecomposition& zones = settings.zones;
  if (zones.fine_nx() != state.model.grid.coarse().nx || zones.fine_nz() != state.model.grid.coarse().nz) {
    throw ValidationError("zone decomposition does not match the parameter grid");
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (!settings.record_wall_time) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const Eigen::SparseMatrix<double> laplacian = laplacian_matrix(zones);

  Evaluation current = evaluate(state.model, observed, survey);
  const double initial = current.misfit;
  std::size_t iteration = 1;
  auto record = [&](double e, double alpha_vs, double alpha_vp, bool retried) {
    IterationRecord r;
    r.iteration = iteration;
    r.fc = survey.wavelet.fc;
    r.misfit = e;
    r.normalized_misfit = initial > 0.0 ? e / initial : (e == 0.0 ? 1.0 : e);
    r.alpha = alpha_vs;
    r.alpha_vp = alpha_vp;
    r.wall_seconds = elapsed();
    r.retried = retried;
    state.history.push_back(r);
    if (on_iteration) on_iteration(r, state);
  };
  record(current.misfit, 0.0, 0.0, false);

  for (std::size_t update = 0; update < settings.schedule.max_iterations; ++update) {
    if (current.misfit == 0.0) break;
    std::vector<ClassStep> steps;
    for (ParameterClass cls : {ParameterClass::Vs, ParameterClass::Vp}) {
      JacobianProblem problem;
      problem.model = &state.model;
      problem.zones = &zones;
      problem.survey = &survey;
      problem.baseline = current.records;
      problem.observed = observed;
      problem.rule = settings.perturbation;
      problem.vp_cap = settings.vp_cap;
      const NormalEquations ne =
          assemble_normal_equations(problem, cls, current.residual, settings.jacobian_mode);
      const std::vector<double> means = restrict_mean(state.model.field(cls).values(), zones);
      const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(
          means.data(), static_cast<Eigen::Index>(means.size()));
      GaussNewtonStep step =
          gauss_newton_update(ne.hessian(), ne.gradient(), laplacian, settings.regularization, m);
      steps.push_back({cls, std::move(step.direction), step.alpha});
    }
    joint_step_lengths(steps, state.model, zones, current, observed, survey, settings);

    double scale = 1.0;
    ParameterizedModel trial = apply_steps(state.model, steps, zones, scale, settings.vp_cap);
    Evaluation next = evaluate(trial, observed, survey);
    bool retried = false;
    if (next.misfit > current.misfit) {
      scale = 0.5;
      retried = true;
      trial = apply_steps(state.model, steps, zones, scale, settings.vp_cap);
      next = evaluate(trial, observed, survey);
    }
    const double drop = (current.misfit - next.misfit) / current.misfit;
    state.model = std::move(trial);
    current = std::move(next);
    ++iteration;
    record(current.misfit, scale * steps[0].alpha, scale * steps[1].alpha, retried);
    if (drop < settings.schedule.plateau_tolerance) break;
  }
}

InversionState frequency_continuation(const ParameterizedModel& initial,
                                      std::span<const std::vector<ShotRecord>> observed,
                                      std::span<const Survey> surveys,
                                      const InversionSettings& settings,
                                      const IterationCallback& on_iteration,
                                      const std::function<void(const InversionState&)>& on_stage) {
  settings.schedule.validate();
  const std::size_t stages = settings.schedule.frequencies.size();
  if (observed.size() != stages || surveys.size() != stages) {
    throw ValidationError("need one observed survey per scheduled frequency");
  }
  InversionState state{initial, 0, {}};
  for (std::size_t s = 0; s < stages; ++s) {
    state.stage = s;
    invert_stage(state, observed[s], surveys[s], settings, on_iteration);
    if (on_stage) on_stage(state);
  }
  return state;
}

}  // namespace seisgn
