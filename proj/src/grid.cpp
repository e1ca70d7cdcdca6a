#include "seisgn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seisgn/error.hpp"

namespace seisgn {

void GridGeometry::validate() const {
  if (nx < 2 || nz < 2) {
    throw ValidationError("grid needs nx >= 2 and nz >= 2, got " + std::to_string(nx) + "x" +
                          std::to_string(nz));
  }
  if (!(h1 > 0.0) || !(h3 > 0.0) || !std::isfinite(h1) || !std::isfinite(h3)) {
    throw ValidationError("grid steps must be positive and finite");
  }
}

void Field2D::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Field2D::max() const { return *std::max_element(data_.begin(), data_.end()); }

double Field2D::min() const { return *std::min_element(data_.begin(), data_.end()); }

double Field2D::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Field2D::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace seisgn
