#include "seisgn/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "seisgn/error.hpp"
#include "seisgn/parallel.hpp"

namespace seisgn {
namespace {

// Full-field finiteness scans are amortized over this many steps.
constexpr std::size_t kFiniteCheckInterval = 16;

}  // namespace

void TimeAxis::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  if (nt == 0) throw ValidationError("time axis needs at least one step");
}

TimeAxis make_time_axis(double duration, double dt) {
  if (!(duration > 0.0)) throw ValidationError("record duration must be positive");
  TimeAxis t{dt, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9))};
  t.validate();
  return t;
}

SourceWavelet SourceWavelet::centered(double fc, double amplitude) {
  if (!(fc > 0.0)) throw ValidationError("center frequency must be positive");
  return {fc, 1.0 / fc, amplitude};
}

void SourceWavelet::validate() const {
  if (!(fc > 0.0) || !std::isfinite(fc)) throw ValidationError("center frequency must be positive");
  if (!(t0 >= 0.0) || !std::isfinite(t0)) throw ValidationError("wavelet delay must be >= 0");
}

double ricker(double t, const SourceWavelet& w) {
  const double a = std::numbers::pi * w.fc * (t - w.t0);
  const double a2 = a * a;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

double stable_dt(double vp_max, const GridGeometry& geometry, double safety) {
  geometry.validate();
  if (!(safety > 0.0 && safety <= 1.0)) throw ValidationError("safety factor must lie in (0, 1]");
  if (!(vp_max > 0.0)) throw ValidationError("maximum vp must be positive");
  const double inv = std::sqrt(1.0 / (geometry.h1 * geometry.h1) + 1.0 / (geometry.h3 * geometry.h3));
  return safety / (vp_max * inv);
}

double stable_dt(const ElasticModel& model, const GridGeometry& geometry, double safety) {
  return stable_dt(model.vp.max(), geometry, safety);
}

Wavefield::Wavefield(const GridGeometry& g)
    : u(g.nx, g.nz), v(g.nx, g.nz), txx(g.nx, g.nz), tzz(g.nx, g.nz), txz(g.nx, g.nz) {}

bool Wavefield::all_finite() const {
  return u.all_finite() && v.all_finite() && txx.all_finite() && tzz.all_finite() &&
         txz.all_finite();
}

double Wavefield::max_abs() const {
  return std::max({u.max_abs(), v.max_abs(), txx.max_abs(), tzz.max_abs(), txz.max_abs()});
}

StaggeredMaterial::StaggeredMaterial(const ElasticModel& model)
    : geometry(model.geometry),
      buoyancy_u(geometry.nx, geometry.nz),
      buoyancy_v(geometry.nx, geometry.nz),
      lambda_n(geometry.nx, geometry.nz),
      mu_n(geometry.nx, geometry.nz),
      mu_s(geometry.nx, geometry.nz),
      vs(model.vs),
      vp(model.vp) {
  model.validate();
  const auto [lambda, mu] = model.lame();
  const std::size_t nx = geometry.nx, nz = geometry.nz;
  for (std::size_t j = 0; j < nz; ++j) {
    const std::size_t jp = std::min(j + 1, nz - 1);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t ip = std::min(i + 1, nx - 1);
      buoyancy_u(i, j) = 1.0 / model.rho(i, j);
      buoyancy_v(i, j) = 0.25 * (1.0 / model.rho(i, j) + 1.0 / model.rho(ip, j) +
                                 1.0 / model.rho(i, jp) + 1.0 / model.rho(ip, jp));
      lambda_n(i, j) = 0.5 * (lambda(i, j) + lambda(ip, j));
      mu_n(i, j) = 0.5 * (mu(i, j) + mu(ip, j));
      mu_s(i, j) = 0.5 * (mu(i, j) + mu(i, jp));
    }
  }
}

void step_velocity(Wavefield& w, const StaggeredMaterial& m, double dt) {
  const std::size_t nx = m.geometry.nx, nz = m.geometry.nz;
  const double cx = dt / m.geometry.h1, cz = dt / m.geometry.h3;
  for (std::size_t j = 0; j + 1 < nz; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double txz_up = j > 0 ? w.txz(i, j - 1) : 0.0;
      w.u(i, j) += m.buoyancy_u(i, j) * cx * (w.txx(i, j) - w.txx(i - 1, j)) +
                   m.buoyancy_u(i, j) * cz * (w.txz(i, j) - txz_up);
    }
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      w.v(i, j) += m.buoyancy_v(i, j) * cx * (w.txz(i + 1, j) - w.txz(i, j)) +
                   m.buoyancy_v(i, j) * cz * (w.tzz(i, j + 1) - w.tzz(i, j));
    }
  }
}

void step_stress(Wavefield& w, const StaggeredMaterial& m, double dt) {
  const std::size_t nx = m.geometry.nx, nz = m.geometry.nz;
  const double cx = dt / m.geometry.h1, cz = dt / m.geometry.h3;

  // Surface row: tzz = 0 eliminates dv/dz, leaving the plane-stress modulus.
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    const double l = m.lambda_n(i, 0), mu = m.mu_n(i, 0);
    const double p = l + 2.0 * mu;
    const double c = p > 0.0 ? 4.0 * mu * (l + mu) / p : 0.0;
    w.txx(i, 0) += c * cx * (w.u(i + 1, 0) - w.u(i, 0));
  }
  for (std::size_t j = 1; j < nz; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double l = m.lambda_n(i, j);
      const double p = l + 2.0 * m.mu_n(i, j);
      const double du = w.u(i + 1, j) - w.u(i, j);
      const double dv = w.v(i, j) - w.v(i, j - 1);
      w.txx(i, j) += p * cx * du + l * cz * dv;
      w.tzz(i, j) += p * cz * dv + l * cx * du;
    }
  }
  for (std::size_t j = 0; j + 1 < nz; ++j) {
    for (std::size_t i = 1; i < nx; ++i) {
      w.txz(i, j) += m.mu_s(i, j) * cz * (w.u(i, j + 1) - w.u(i, j)) +
                     m.mu_s(i, j) * cx * (w.v(i, j) - w.v(i - 1, j));
    }
  }
}

void step_wavefield(Wavefield& w, const StaggeredMaterial& m, double dt) {
  step_velocity(w, m, dt);
  step_stress(w, m, dt);
}

void apply_free_surface(Wavefield& w) {
  for (std::size_t i = 0; i < w.tzz.nx(); ++i) {
    w.tzz(i, 0) = 0.0;
    w.txz(i, 0) = 0.0;
  }
}

void apply_absorbing(Wavefield& w, const StaggeredMaterial& m, double dt, BoundarySide side) {
  const std::size_t nx = m.geometry.nx, nz = m.geometry.nz;
  if (side == BoundarySide::Bottom) {
    const std::size_t b = nz - 1;
    const double c = dt / m.geometry.h3;
    for (std::size_t i = 0; i < nx; ++i) {
      w.u(i, b) -= m.vs(i, b) * c * (w.u(i, b) - w.u(i, b - 1));
      w.v(i, b) -= m.vp(i, b) * c * (w.v(i, b) - w.v(i, b - 1));
    }
  } else {
    const std::size_t b = nx - 1;
    const double c = dt / m.geometry.h1;
    for (std::size_t j = 0; j < nz; ++j) {
      w.u(b, j) -= m.vs(b, j) * c * (w.u(b, j) - w.u(b - 1, j));
      w.v(b, j) -= m.vp(b, j) * c * (w.v(b, j) - w.v(b - 1, j));
    }
  }
}

void apply_symmetry(Wavefield& w) {
  for (std::size_t j = 0; j < w.u.nz(); ++j) {
    w.u(0, j) = 0.0;
    w.txz(0, j) = 0.0;
  }
}

std::size_t surface_node(const GridGeometry& g, double x) {
  if (!(x >= 0.0 && x <= g.length())) {
    throw ValidationError("surface position " + std::to_string(x) + " m lies outside the grid");
  }
  // v/tzz columns sit at (i + 1/2) h1; the last column is the absorbing boundary.
  const auto i = static_cast<std::size_t>(std::floor(x / g.h1 + 1e-9));
  return std::min(i, g.nx - 2);
}

void inject_source(Wavefield& w, const GridGeometry& g, double x, double t, const SourceWavelet& wl) {
  w.tzz(surface_node(g, x), 0) += wl.amplitude * ricker(t, wl);
}

double ShotRecord::max_abs() const {
  double m = 0.0;
  for (double v : samples) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> simulate(const StaggeredMaterial& material, std::span<const SourceTerm> sources,
                             const SourceWavelet& wavelet, const TimeAxis& time,
                             std::span<const ReceiverNode> receivers, const StepObserver& observer) {
  time.validate();
  const GridGeometry& g = material.geometry;
  for (const SourceTerm& s : sources) {
    if (s.node + 1 >= g.nx) throw ValidationError("source node outside the grid");
  }
  for (const ReceiverNode& r : receivers) {
    if (r.i >= g.nx || r.j >= g.nz) throw ValidationError("receiver node outside the grid");
  }
  Wavefield w(g);
  std::vector<double> out(receivers.size() * time.nt, 0.0);
  for (std::size_t k = 0; k < time.nt; ++k) {
    const double t = static_cast<double>(k) * time.dt;
    const double r = wavelet.amplitude * ricker(t, wavelet);
    for (const SourceTerm& s : sources) w.tzz(s.node, 0) += s.scale * r;

    // Boundary velocities advance from the previous level; step_velocity skips them.
    apply_absorbing(w, material, time.dt, BoundarySide::Bottom);
    apply_absorbing(w, material, time.dt, BoundarySide::Right);
    step_velocity(w, material, time.dt);
    apply_symmetry(w);
    step_stress(w, material, time.dt);
    apply_free_surface(w);
    apply_symmetry(w);

    for (std::size_t q = 0; q < receivers.size(); ++q) {
      out[q * time.nt + k] = w.v(receivers[q].i, receivers[q].j);
    }
    if (observer) observer(k, w);
    if ((k + 1) % kFiniteCheckInterval == 0 || k + 1 == time.nt) {
      if (!w.all_finite()) {
        throw NumericalError("wavefield became non-finite by step " + std::to_string(k));
      }
    }
  }
  return out;
}

ShotRecord run_shot(const StaggeredMaterial& material, const Survey& survey, std::size_t shot) {
  const GridGeometry& g = material.geometry;
  survey.acquisition.validate(g);
  survey.wavelet.validate();
  survey.time.validate();
  if (shot >= survey.acquisition.sources.size()) throw ValidationError("shot index out of range");
  if (survey.time.dt > stable_dt(material.vp.max(), g) * (1.0 + 1e-12)) {
    throw ValidationError("time step " + std::to_string(survey.time.dt) +
                          " s exceeds the stability bound of the model");
  }
  const SourceTerm source{surface_node(g, survey.acquisition.sources[shot]), 1.0};
  std::vector<ReceiverNode> receivers;
  receivers.reserve(survey.acquisition.receivers.size());
  for (double x : survey.acquisition.receivers) receivers.push_back({surface_node(g, x), 0});

  ShotRecord rec(shot, receivers.size(), survey.time.nt, survey.time.dt);
  try {
    rec.samples = simulate(material, std::span(&source, 1), survey.wavelet, survey.time, receivers);
  } catch (const NumericalError& e) {
    throw NumericalError("shot " + std::to_string(shot) + ": " + e.what());
  }
  return rec;
}

ShotRecord run_shot(const ElasticModel& model, const Survey& survey, std::size_t shot) {
  return run_shot(StaggeredMaterial(model), survey, shot);
}

std::vector<ShotRecord> run_survey(const ElasticModel& model, const Survey& survey) {
  const StaggeredMaterial material(model);
  std::vector<ShotRecord> records(survey.acquisition.sources.size());
  parallel_for(records.size(), [&](std::size_t s) { records[s] = run_shot(material, survey, s); });
  return records;
}

}  // namespace seisgn
