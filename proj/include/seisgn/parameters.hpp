#pragma once

#include <cstddef>
#include <vector>

#include "seisgn/grid.hpp"
#include "seisgn/model.hpp"
#include "seisgn/multires.hpp"

namespace seisgn {

/// The inversion parameter grid: each parameter cell covers a ratio-by-ratio
/// block of finite-difference cells.
class ParameterGrid {
 public:
  ParameterGrid() = default;
  ParameterGrid(GridGeometry fd, std::size_t ratio);

  const GridGeometry& fd() const { return fd_; }
  const GridGeometry& coarse() const { return param_; }
  std::size_t ratio() const { return ratio_; }

  /// Each parameter cell sets every FD cell it covers.
  Field2D expand(const Field2D& param_field) const;
  /// Block mean of an FD field.
  Field2D average(const Field2D& fd_field) const;

  ElasticModel expand(const ElasticModel& param_model) const;
  ElasticModel average(const ElasticModel& fd_model) const;

 private:
  GridGeometry fd_;
  GridGeometry param_;
  std::size_t ratio_ = 1;
};

/// Density and both velocity classes on the parameter grid; forward solves
/// run on the expanded FD model.
struct ParameterizedModel {
  ParameterGrid grid;
  Field2D rho;
  Field2D vs;
  Field2D vp;

  static ParameterizedModel from_parameter_model(const ParameterGrid& grid, const ElasticModel& m);

  Field2D& field(ParameterClass c) { return c == ParameterClass::Vs ? vs : vp; }
  const Field2D& field(ParameterClass c) const { return c == ParameterClass::Vs ? vs : vp; }

  ElasticModel parameter_model() const;
  ElasticModel fd_model() const;
};

/// Values of one parameter class over the coarse cells of a decomposition.
struct ParameterVector {
  ParameterClass cls = ParameterClass::Vs;
  std::vector<double> values;
};

/// Coarse-cell means of a parameter-grid field, ordered zone by zone and
/// row-major inside each zone.
ParameterVector flatten(const Field2D& field, const ZoneDecomposition& zones,
                        ParameterClass cls = ParameterClass::Vs);

/// Writes each coarse value back to all the fine cells it covers.
Field2D unflatten(const ParameterVector& params, const ZoneDecomposition& zones);

}  // namespace seisgn
