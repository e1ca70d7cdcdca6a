#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace seisgn {

/// Rectangular 2-D grid: x to the right, z positive downward, origin at (0,0).
struct GridGeometry {
  std::size_t nx = 0;
  std::size_t nz = 0;
  double h1 = 0.0;  // x step (m)
  double h3 = 0.0;  // z step (m)

  void validate() const;
  std::size_t size() const { return nx * nz; }
  double length() const { return static_cast<double>(nx) * h1; }
  double depth() const { return static_cast<double>(nz) * h3; }
  bool operator==(const GridGeometry&) const = default;
};

/// Dense nx-by-nz scalar field, row-major with rows at constant depth.
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::size_t nx, std::size_t nz, double fill = 0.0)
      : nx_(nx), nz_(nz), data_(nx * nz, fill) {}

  std::size_t nx() const { return nx_; }
  std::size_t nz() const { return nz_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * nx_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * nx_ + i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  double max() const;
  double min() const;
  double max_abs() const;
  bool all_finite() const;

  bool operator==(const Field2D&) const = default;

 private:
  std::size_t nx_ = 0;
  std::size_t nz_ = 0;
  std::vector<double> data_;
};

}  // namespace seisgn
