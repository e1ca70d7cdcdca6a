#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "seisgn/forward.hpp"
#include "seisgn/jacobian.hpp"
#include "seisgn/parameters.hpp"
#include "seisgn/model.hpp"

namespace seisgn::testing {

inline ElasticModel homogeneous_model(std::size_t nx, std::size_t nz, double h, double vs, double vp,
                                      double rho = kDefaultDensity) {
  GridGeometry g{nx, nz, h, h};
  return ElasticModel(g, Field2D(nx, nz, rho), Field2D(nx, nz, vs), Field2D(nx, nz, vp));
}

inline double relative_difference(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline std::vector<double> random_trace(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> t(n);
  for (double& x : t) x = d(rng);
  return t;
}

// Small two-layer problem on a param_nx x param_nz parameter grid whose
// cells are `ratio` FD cells wide. Observed data come from a model with a
// slower patch near the surface.
struct ToyProblem {
  ParameterizedModel model;
  ZoneDecomposition zones;
  Survey survey;
  std::vector<ShotRecord> baseline;
  std::vector<ShotRecord> observed;
  PerturbationRule rule;

  ToyProblem(std::size_t param_nx, std::size_t param_nz, std::size_t ratio, std::vector<double> sources,
             std::vector<double> receivers, std::size_t nt, double h = 0.5) {
    const GridGeometry fd{param_nx * ratio, param_nz * ratio, h, h};
    const ParameterGrid grid(fd, ratio);
    LayeredModelSpec spec;
    spec.layers = {{grid.coarse().depth() / 2.0, 200.0}, {grid.coarse().depth(), 350.0}};
    model = ParameterizedModel::from_parameter_model(grid, build_layered_void_model(spec, grid.coarse()));
    zones = ZoneDecomposition::identity(param_nx, param_nz);
    survey.acquisition = {std::move(sources), std::move(receivers), 0};
    survey.wavelet = SourceWavelet::centered(60.0);
    survey.time = TimeAxis{stable_dt(1000.0, fd, 0.9), nt};
    baseline = run_survey(model.fd_model(), survey);
    ParameterizedModel truth = model;
    truth.vs(0, 0) *= 0.8;
    truth.vp(0, 0) *= 0.9;
    if (param_nx > 1) truth.vs(1, 0) *= 1.1;
    observed = run_survey(truth.fd_model(), survey);
  }

  JacobianProblem problem() const {
    JacobianProblem p;
    p.model = &model;
    p.zones = &zones;
    p.survey = &survey;
    p.baseline = baseline;
    p.observed = observed;
    p.rule = rule;
    p.vp_cap = 1000.0;
    return p;
  }

  ResidualVector residual() const {
    return modified_residual(baseline, observed, survey.acquisition.reference_receiver);
  }
};

inline std::vector<JacobianBlock> collect_blocks(const JacobianProblem& p, ParameterClass cls) {
  std::vector<JacobianBlock> blocks;
  stream_jacobian(p, cls, [&](const JacobianBlock& b) { blocks.push_back(b); });
  return blocks;
}

}  // namespace seisgn::testing
