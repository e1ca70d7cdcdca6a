#include "seisgn/jacobian.hpp"

#include <cmath>
#include <string>

#include "seisgn/convolution.hpp"
#include "seisgn/error.hpp"
#include "seisgn/parallel.hpp"

namespace seisgn {
namespace {

void check_pair(const ShotRecord& a, const ShotRecord& b, std::size_t reference) {
  if (a.nr != b.nr || a.nt != b.nt || a.dt != b.dt) {
    throw ValidationError("shot " + std::to_string(a.shot) +
                          ": estimated and observed records differ in geometry");
  }
  if (reference >= a.nr) throw ValidationError("reference receiver out of range");
}

bool admissible(const Field2D& vs, const Field2D& vp, ParameterClass cls,
                const std::vector<std::size_t>& members, double delta, double vp_cap) {
  for (std::size_t f : members) {
    const double s = vs.values()[f], p = vp.values()[f];
    if (cls == ParameterClass::Vs) {
      const double ns = s + delta;
      if (ns < 0.0 || p * p < 2.0 * ns * ns) return false;
    } else {
      const double np = p + delta;
      if (!(np > 0.0) || np > vp_cap || np * np < 2.0 * s * s) return false;
    }
  }
  return true;
}

ShotRecord perturbed_shot(const JacobianProblem& pr, ParameterClass cls, std::size_t coarse,
                          double delta, std::size_t shot) {
  ParameterizedModel m = *pr.model;
  auto values = m.field(cls).values();
  for (std::size_t f : pr.zones->members(coarse)) values[f] += delta;
  try {
    return run_shot(StaggeredMaterial(m.fd_model()), *pr.survey, shot);
  } catch (const NumericalError& e) {
    throw NumericalError("perturbed solve for " + std::string(to_string(cls)) + " parameter " +
                         std::to_string(coarse) + " failed: " + e.what());
  }
}

}  // namespace

ResidualVector modified_residual(const ShotRecord& estimated, const ShotRecord& observed,
                                 std::size_t reference) {
  return modified_residual(std::span(&estimated, 1), std::span(&observed, 1), reference);
}

ResidualVector modified_residual(std::span<const ShotRecord> estimated,
                                 std::span<const ShotRecord> observed, std::size_t reference) {
  if (estimated.size() != observed.size() || estimated.empty()) {
    throw ValidationError("modified_residual: shot counts differ or are zero");
  }
  ResidualVector r;
  r.ns = estimated.size();
  r.nr = estimated.front().nr;
  r.nt_conv = 2 * estimated.front().nt - 1;
  r.values.assign(r.ns * r.nr * r.nt_conv, 0.0);
  for (std::size_t s = 0; s < r.ns; ++s) {
    const ShotRecord& f = estimated[s];
    const ShotRecord& d = observed[s];
    check_pair(f, d, reference);
    if (f.nr != r.nr || f.nt != estimated.front().nt) {
      throw ValidationError("modified_residual: shots have different receiver or sample counts");
    }
    for (std::size_t j = 0; j < r.nr; ++j) {
      const std::vector<double> a = convolve(f.trace(j), d.trace(reference));
      const std::vector<double> b = convolve(d.trace(j), f.trace(reference));
      double* out = r.values.data() + r.index(s, j, 0);
      for (std::size_t t = 0; t < r.nt_conv; ++t) out[t] = a[t] - b[t];
    }
  }
  return r;
}

double PerturbationRule::step(double value) const { return std::max(fraction * std::abs(value), floor); }

void PerturbationRule::validate() const {
  if (!(fraction >= 0.0) || !(floor >= 0.0) || !(fraction > 0.0 || floor > 0.0)) {
    throw ValidationError("perturbation rule needs a positive fraction or floor");
  }
}

double perturbation_step(const JacobianProblem& pr, ParameterClass cls, std::size_t coarse) {
  const auto& members = pr.zones->members(coarse);
  const Field2D& field = pr.model->field(cls);
  double mean = 0.0;
  for (std::size_t f : members) mean += field.values()[f];
  mean /= static_cast<double>(members.size());
  const double delta = pr.rule.step(mean);
  if (admissible(pr.model->vs, pr.model->vp, cls, members, delta, pr.vp_cap)) return delta;
  if (admissible(pr.model->vs, pr.model->vp, cls, members, -delta, pr.vp_cap)) return -delta;
  return 0.0;  // pinned between bounds
}

std::vector<ShotRecord> shot_sensitivities(const JacobianProblem& pr, ParameterClass cls,
                                           std::size_t shot) {
  const std::size_t m = pr.zones->coarse_count();
  const ShotRecord& base = pr.baseline[shot];
  std::vector<ShotRecord> sens(m);
  parallel_for(m, [&](std::size_t p) {
    const double delta = perturbation_step(pr, cls, p);
    if (delta == 0.0) {
      sens[p] = ShotRecord(base.shot, base.nr, base.nt, base.dt);
      return;
    }
    const bool central = pr.rule.scheme == PerturbationRule::Scheme::Central &&
                         admissible(pr.model->vs, pr.model->vp, cls, pr.zones->members(p),
                                    -delta, pr.vp_cap);
    ShotRecord plus = perturbed_shot(pr, cls, p, delta, shot);
    if (central) {
      const ShotRecord minus = perturbed_shot(pr, cls, p, -delta, shot);
      for (std::size_t k = 0; k < plus.samples.size(); ++k) {
        plus.samples[k] = (plus.samples[k] - minus.samples[k]) / (2.0 * delta);
      }
    } else {
      for (std::size_t k = 0; k < plus.samples.size(); ++k) {
        plus.samples[k] = (plus.samples[k] - base.samples[k]) / delta;
      }
    }
    sens[p] = std::move(plus);
  });
  return sens;
}

void stream_jacobian(const JacobianProblem& pr, ParameterClass cls, const BlockSink& sink) {
  if (!pr.model || !pr.zones || !pr.survey) throw ValidationError("stream_jacobian: incomplete problem");
  pr.rule.validate();
  const std::size_t ns = pr.survey->acquisition.sources.size();
  const std::size_t nr = pr.survey->acquisition.receivers.size();
  const std::size_t k = pr.survey->acquisition.reference_receiver;
  const std::size_t nt = pr.survey->time.nt;
  if (pr.baseline.size() != ns || pr.observed.size() != ns) {
    throw ValidationError("stream_jacobian: baseline/observed shot counts do not match the survey");
  }
  if (pr.zones->fine_nx() != pr.model->grid.coarse().nx ||
      pr.zones->fine_nz() != pr.model->grid.coarse().nz) {
    throw ValidationError("stream_jacobian: zones do not match the parameter grid");
  }
  for (std::size_t s = 0; s < ns; ++s) {
    check_pair(pr.baseline[s], pr.observed[s], k);
    if (pr.baseline[s].nt != nt || pr.baseline[s].nr != nr) {
      throw ValidationError("stream_jacobian: record shape does not match the survey");
    }
  }

  const std::size_t m = pr.zones->coarse_count();
  SpectralConvolver conv(nt);
  SpectralConvolver::Spectrum product(conv.spectrum_length());
  for (std::size_t s = 0; s < ns; ++s) {
    const std::vector<ShotRecord> sens = shot_sensitivities(pr, cls, s);
    std::vector<SpectralConvolver::Spectrum> observed(nr);
    for (std::size_t j = 0; j < nr; ++j) observed[j] = conv.transform(pr.observed[s].trace(j));
    std::vector<SpectralConvolver::Spectrum> reference(m);
    for (std::size_t p = 0; p < m; ++p) reference[p] = conv.transform(sens[p].trace(k));

    JacobianBlock block;
    block.shot = s;
    block.rows.resize(static_cast<Eigen::Index>(conv.output_length()), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < nr; ++j) {
      block.receiver = j;
      for (std::size_t p = 0; p < m; ++p) {
        const SpectralConvolver::Spectrum sj = conv.transform(sens[p].trace(j));
        for (std::size_t f = 0; f < product.size(); ++f) {
          product[f] = sj[f] * observed[k][f] - observed[j][f] * reference[p][f];
        }
        conv.inverse(product, std::span(block.rows.col(static_cast<Eigen::Index>(p)).data(),
                                        conv.output_length()));
      }
      if (!block.rows.allFinite()) {
        throw NumericalError("non-finite Jacobian entries for shot " + std::to_string(s));
      }
      sink(block);
    }
  }
}

NormalEquations::NormalEquations(std::size_t parameters)
    : lower_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(parameters),
                                   static_cast<Eigen::Index>(parameters))),
      gradient_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameters))) {}

void NormalEquations::add(const JacobianBlock& block) {
  if (block.rows.cols() != lower_.cols()) {
    throw ValidationError("NormalEquations: block has " + std::to_string(block.rows.cols()) +
                          " columns, expected " + std::to_string(lower_.cols()));
  }
  lower_.selfadjointView<Eigen::Lower>().rankUpdate(block.rows.transpose());
  ++blocks_;
}

void NormalEquations::add(const JacobianBlock& block, std::span<const double> residual_segment) {
  if (static_cast<std::size_t>(block.rows.rows()) != residual_segment.size()) {
    throw ValidationError("NormalEquations: residual segment length does not match the block");
  }
  add(block);
  const Eigen::Map<const Eigen::VectorXd> r(residual_segment.data(),
                                            static_cast<Eigen::Index>(residual_segment.size()));
  gradient_.noalias() += block.rows.transpose() * r;
}

Eigen::MatrixXd NormalEquations::hessian() const {
  Eigen::MatrixXd h = lower_.triangularView<Eigen::Lower>();
  h.triangularView<Eigen::StrictlyUpper>() = lower_.transpose();
  return h;
}

Eigen::MatrixXd accumulate_hessian(std::span<const JacobianBlock> blocks) {
  if (blocks.empty()) throw ValidationError("accumulate_hessian: no blocks");
  NormalEquations ne(static_cast<std::size_t>(blocks.front().rows.cols()));
  for (const JacobianBlock& b : blocks) ne.add(b);
  return ne.hessian();
}

Eigen::VectorXd accumulate_gradient(std::span<const JacobianBlock> blocks, const ResidualVector& r) {
  if (blocks.empty()) throw ValidationError("accumulate_gradient: no blocks");
  NormalEquations ne(static_cast<std::size_t>(blocks.front().rows.cols()));
  for (const JacobianBlock& b : blocks) {
    if (b.shot >= r.ns || b.receiver >= r.nr) {
      throw ValidationError("accumulate_gradient: block outside the residual index map");
    }
    ne.add(b, r.segment(b.shot, b.receiver));
  }
  return ne.gradient();
}

Eigen::MatrixXd assemble_dense(std::span<const JacobianBlock> blocks, std::size_t ns, std::size_t nr) {
  if (blocks.empty()) throw ValidationError("assemble_dense: no blocks");
  const Eigen::Index rows = blocks.front().rows.rows();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(rows * static_cast<Eigen::Index>(ns * nr),
                                            blocks.front().rows.cols());
  for (const JacobianBlock& b : blocks) {
    if (b.rows.rows() != rows || b.rows.cols() != j.cols()) {
      throw ValidationError("assemble_dense: inconsistent block shapes");
    }
    j.middleRows(static_cast<Eigen::Index>(b.shot * nr + b.receiver) * rows, rows) = b.rows;
  }
  return j;
}

}  // namespace seisgn
