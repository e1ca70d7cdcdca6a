#include "seisgn/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seisgn/error.hpp"

namespace seisgn {
namespace {

// Relative slack on lambda >= 0 so vp == sqrt(2) vs survives rounding.
constexpr double kLambdaSlack = 1e-12;

std::string cell_name(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

std::string_view to_string(ParameterClass c) { return c == ParameterClass::Vs ? "vs" : "vp"; }

ElasticModel::ElasticModel(GridGeometry g, Field2D rho_, Field2D vs_, Field2D vp_)
    : geometry(g), rho(std::move(rho_)), vs(std::move(vs_)), vp(std::move(vp_)) {
  validate();
}

void ElasticModel::validate() const {
  geometry.validate();
  for (const Field2D* f : {&rho, &vs, &vp}) {
    if (f->nx() != geometry.nx || f->nz() != geometry.nz) {
      throw ValidationError("model field shape does not match its grid geometry");
    }
  }
  for (std::size_t j = 0; j < geometry.nz; ++j) {
    for (std::size_t i = 0; i < geometry.nx; ++i) {
      const double r = rho(i, j), s = vs(i, j), p = vp(i, j);
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw ValidationError("density must be positive at cell " + cell_name(i, j));
      }
      if (!(s >= 0.0) || !std::isfinite(s)) {
        throw ValidationError("vs must be non-negative at cell " + cell_name(i, j));
      }
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw ValidationError("vp must be positive at cell " + cell_name(i, j));
      }
      if (p * p - 2.0 * s * s < -kLambdaSlack * p * p) {
        throw ValidationError("vp < sqrt(2) vs (negative lambda) at cell " + cell_name(i, j));
      }
    }
  }
}

std::pair<Field2D, Field2D> ElasticModel::lame() const { return lame_from_velocity(rho, vs, vp); }

LameParameters lame_from_velocity(double rho, double vs, double vp) {
  const double mu = rho * vs * vs;
  double lambda = rho * vp * vp - 2.0 * mu;
  if (lambda < 0.0) {
    if (lambda < -kLambdaSlack * rho * vp * vp) {
      throw ValidationError("negative lambda: vp/vs ratio below sqrt(2)");
    }
    lambda = 0.0;
  }
  return {lambda, mu};
}

std::pair<Field2D, Field2D> lame_from_velocity(const Field2D& rho, const Field2D& vs,
                                               const Field2D& vp) {
  if (rho.nx() != vs.nx() || rho.nz() != vs.nz() || rho.nx() != vp.nx() || rho.nz() != vp.nz()) {
    throw ValidationError("lame_from_velocity: field shapes differ");
  }
  Field2D lambda(rho.nx(), rho.nz());
  Field2D mu(rho.nx(), rho.nz());
  for (std::size_t j = 0; j < rho.nz(); ++j) {
    for (std::size_t i = 0; i < rho.nx(); ++i) {
      const auto lm = lame_from_velocity(rho(i, j), vs(i, j), vp(i, j));
      lambda(i, j) = lm.lambda;
      mu(i, j) = lm.mu;
    }
  }
  return {std::move(lambda), std::move(mu)};
}

Velocities velocity_from_lame(double rho, double lambda, double mu) {
  if (!(rho > 0.0)) throw ValidationError("velocity_from_lame: density must be positive");
  return {std::sqrt(mu / rho), std::sqrt((lambda + 2.0 * mu) / rho)};
}

double vp_from_vs(double vs, double nu) {
  if (!(nu > 0.0 && nu < 0.5)) {
    throw ValidationError("Poisson ratio must lie in (0, 0.5), got " + std::to_string(nu));
  }
  return std::sqrt(2.0 * (1.0 - nu) / (1.0 - 2.0 * nu)) * vs;
}

ElasticModuli moduli_from_lame(double lambda, double mu) {
  if (mu < 0.0) throw ValidationError("moduli_from_lame: mu must be non-negative");
  if (!(lambda + mu > 0.0)) throw ValidationError("moduli_from_lame: lambda + mu must be positive");
  return {lambda + 2.0 * mu / 3.0, (3.0 * lambda + 2.0 * mu) * mu / (lambda + mu), mu};
}

ElasticModel build_layered_void_model(const LayeredModelSpec& spec, const GridGeometry& geometry) {
  geometry.validate();
  if (spec.layers.empty()) throw ValidationError("layered model needs at least one layer");
  double previous = 0.0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!(layer.bottom_m > previous)) {
      throw ValidationError("layer " + std::to_string(l) + " bottom must increase with depth");
    }
    if (!(layer.vs >= 0.0) || !(layer.rho > 0.0)) {
      throw ValidationError("layer " + std::to_string(l) + " has invalid vs or density");
    }
    previous = layer.bottom_m;
  }
  if (previous < geometry.depth()) {
    throw ValidationError("layers end above the bottom of the domain");
  }

  Field2D rho(geometry.nx, geometry.nz), vs(geometry.nx, geometry.nz), vp(geometry.nx, geometry.nz);
  for (std::size_t j = 0; j < geometry.nz; ++j) {
    const double zc = (static_cast<double>(j) + 0.5) * geometry.h3;
    const auto it = std::find_if(spec.layers.begin(), spec.layers.end(),
                                 [zc](const LayerSpec& l) { return zc < l.bottom_m; });
    for (std::size_t i = 0; i < geometry.nx; ++i) {
      rho(i, j) = it->rho;
      vs(i, j) = it->vs;
      vp(i, j) = vp_from_vs(it->vs, spec.poisson);
    }
  }

  std::vector<char> is_void(geometry.size(), 0);
  for (std::size_t v = 0; v < spec.voids.size(); ++v) {
    const VoidSpec& vd = spec.voids[v];
    const std::string name = "void " + std::to_string(v);
    if (!(vd.x1 > vd.x0) || !(vd.z1 > vd.z0)) throw ValidationError(name + " has empty extent");
    if (vd.x0 < 0.0 || vd.z0 < 0.0 || vd.x1 > geometry.length() || vd.z1 > geometry.depth()) {
      throw ValidationError(name + " lies outside the domain");
    }
    if (!(vd.vp > 0.0)) throw ValidationError(name + " needs a positive vp");
    std::size_t covered = 0;
    for (std::size_t j = 0; j < geometry.nz; ++j) {
      const double zc = (static_cast<double>(j) + 0.5) * geometry.h3;
      if (zc < vd.z0 || zc >= vd.z1) continue;
      for (std::size_t i = 0; i < geometry.nx; ++i) {
        const double xc = (static_cast<double>(i) + 0.5) * geometry.h1;
        if (xc < vd.x0 || xc >= vd.x1) continue;
        char& flag = is_void[j * geometry.nx + i];
        if (flag) throw ValidationError(name + " overlaps another void");
        flag = 1;
        vs(i, j) = 0.0;
        vp(i, j) = vd.vp;
        ++covered;
      }
    }
    if (covered == 0) throw ValidationError(name + " covers no cell centers");
  }
  return ElasticModel(geometry, std::move(rho), std::move(vs), std::move(vp));
}

ElasticModel build_gradient_model(const GridGeometry& geometry, double vs_top, double vs_bottom,
                                  double poisson, double rho) {
  geometry.validate();
  if (!(vs_top >= 0.0) || !(vs_bottom >= 0.0)) {
    throw ValidationError("gradient model velocities must be non-negative");
  }
  Field2D r(geometry.nx, geometry.nz, rho), vs(geometry.nx, geometry.nz), vp(geometry.nx, geometry.nz);
  const double span = static_cast<double>(geometry.nz - 1);
  for (std::size_t j = 0; j < geometry.nz; ++j) {
    const double s = vs_top + (vs_bottom - vs_top) * static_cast<double>(j) / span;
    const double p = vp_from_vs(s, poisson);
    for (std::size_t i = 0; i < geometry.nx; ++i) {
      vs(i, j) = s;
      vp(i, j) = p;
    }
  }
  return ElasticModel(geometry, std::move(r), std::move(vs), std::move(vp));
}

void AcquisitionGeometry::validate(const GridGeometry& geometry) const {
  const double length = geometry.length();
  if (sources.empty()) throw ValidationError("acquisition needs at least one source");
  if (receivers.empty()) throw ValidationError("acquisition needs at least one receiver");
  for (double x : sources) {
    if (!(x >= 0.0 && x <= length)) {
      throw ValidationError("source position " + std::to_string(x) + " m outside [0, " +
                            std::to_string(length) + "]");
    }
  }
  for (std::size_t r = 0; r < receivers.size(); ++r) {
    const double x = receivers[r];
    if (!(x >= 0.0 && x <= length)) {
      throw ValidationError("receiver position " + std::to_string(x) + " m outside [0, " +
                            std::to_string(length) + "]");
    }
    for (std::size_t q = 0; q < r; ++q) {
      if (receivers[q] == x) throw ValidationError("receiver positions must be distinct");
    }
  }
  if (reference_receiver >= receivers.size()) {
    throw ValidationError("reference_receiver out of range");
  }
}

}  // namespace seisgn
