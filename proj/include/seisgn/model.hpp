#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "seisgn/grid.hpp"

namespace seisgn {

/// Default mass density for every layer when none is given (kg/m^3).
inline constexpr double kDefaultDensity = 1800.0;
/// Poisson ratio used to derive Vp from Vs for the synthetic models.
inline constexpr double kDefaultPoisson = 0.33;

enum class ParameterClass { Vs, Vp };

std::string_view to_string(ParameterClass c);

/// Per-cell density and wave velocities on one grid. Voids are encoded by vs == 0.
struct ElasticModel {
  GridGeometry geometry;
  Field2D rho;
  Field2D vs;
  Field2D vp;

  ElasticModel() = default;
  ElasticModel(GridGeometry g, Field2D rho_, Field2D vs_, Field2D vp_);

  /// Throws ValidationError naming the first offending cell.
  void validate() const;

  /// Lame lambda and mu fields (Pa).
  std::pair<Field2D, Field2D> lame() const;

  bool operator==(const ElasticModel&) const = default;
};

struct ElasticModuli {
  double kappa = 0.0;  // bulk modulus
  double young = 0.0;
  double shear = 0.0;
};

struct LameParameters {
  double lambda = 0.0;
  double mu = 0.0;
};

struct Velocities {
  double vs = 0.0;
  double vp = 0.0;
};

/// mu = rho vs^2, lambda = rho vp^2 - 2 mu. Rejects lambda < 0.
LameParameters lame_from_velocity(double rho, double vs, double vp);
std::pair<Field2D, Field2D> lame_from_velocity(const Field2D& rho, const Field2D& vs,
                                               const Field2D& vp);

/// Inverse of lame_from_velocity.
Velocities velocity_from_lame(double rho, double lambda, double mu);

/// sqrt(2(1-nu)/(1-2nu)) * vs, for 0 < nu < 0.5.
double vp_from_vs(double vs, double nu);

/// kappa = lambda + 2mu/3, E = (3lambda+2mu)mu/(lambda+mu), G = mu.
ElasticModuli moduli_from_lame(double lambda, double mu);

struct LayerSpec {
  double bottom_m = 0.0;  // depth of the layer's lower boundary
  double vs = 0.0;
  double rho = kDefaultDensity;
};

/// Axis-aligned rectangle in meters; cells whose centers fall inside are void.
struct VoidSpec {
  double x0 = 0.0;
  double z0 = 0.0;
  double x1 = 0.0;
  double z1 = 0.0;
  double vp = 300.0;
};

struct LayeredModelSpec {
  std::vector<LayerSpec> layers;  // top to bottom, bottoms strictly increasing
  std::vector<VoidSpec> voids;
  double poisson = kDefaultPoisson;
};

/// Fills layers top-down (Vp from Vs through the Poisson ratio), then overrides
/// void cells with vs = 0 and the void's Vp.
ElasticModel build_layered_void_model(const LayeredModelSpec& spec, const GridGeometry& geometry);

/// Vs varying linearly with depth from vs_top at the surface to vs_bottom at
/// the bottom row; Vp from the Poisson ratio; constant density.
ElasticModel build_gradient_model(const GridGeometry& geometry, double vs_top, double vs_bottom,
                                  double poisson = kDefaultPoisson,
                                  double rho = kDefaultDensity);

/// Source and receiver x-positions on the free surface.
struct AcquisitionGeometry {
  std::vector<double> sources;
  std::vector<double> receivers;
  std::size_t reference_receiver = 0;

  void validate(const GridGeometry& geometry) const;
  bool operator==(const AcquisitionGeometry&) const = default;
};

}  // namespace seisgn
