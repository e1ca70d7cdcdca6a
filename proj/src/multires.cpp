#include "seisgn/multires.hpp"

#include <cmath>
#include <string>

#include "seisgn/error.hpp"

namespace seisgn {

ZoneDecomposition ZoneDecomposition::identity(std::size_t nx, std::size_t nz) {
  ZoneDecomposition d;
  d.fine_nx_ = nx;
  d.fine_nz_ = nz;
  d.zones_.push_back(Zone{0, nz, 1, 1, nx, nz, 0});
  d.finalize();
  return d;
}

void ZoneDecomposition::finalize() {
  fine_to_coarse_.assign(fine_nx_ * fine_nz_, 0);
  std::size_t offset = 0;
  for (Zone& z : zones_) {
    z.coarse_offset = offset;
    offset += z.coarse_count();
  }
  members_.assign(offset, {});
  for (const Zone& z : zones_) {
    for (std::size_t j = z.row_begin; j < z.row_end; ++j) {
      const std::size_t row = std::min((j - z.row_begin) / z.ratio_z, z.coarse_rows - 1);
      for (std::size_t i = 0; i < fine_nx_; ++i) {
        const std::size_t col = std::min(i / z.ratio_x, z.coarse_cols - 1);
        const std::size_t c = z.coarse_offset + row * z.coarse_cols + col;
        fine_to_coarse_[j * fine_nx_ + i] = c;
      }
    }
  }
  // Members are listed in ascending fine index.
  for (std::size_t f = 0; f < fine_to_coarse_.size(); ++f) members_[fine_to_coarse_[f]].push_back(f);
}

ZoneDecomposition::CoarsePosition ZoneDecomposition::position(std::size_t coarse) const {
  for (std::size_t z = 0; z < zones_.size(); ++z) {
    const Zone& zone = zones_[z];
    if (coarse < zone.coarse_offset + zone.coarse_count()) {
      const std::size_t local = coarse - zone.coarse_offset;
      return {z, local % zone.coarse_cols, local / zone.coarse_cols};
    }
  }
  throw ValidationError("coarse index " + std::to_string(coarse) + " out of range");
}

Eigen::MatrixXd ZoneDecomposition::aggregation_matrix() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fine_count()),
                                            static_cast<Eigen::Index>(coarse_count()));
  for (std::size_t f = 0; f < fine_count(); ++f) {
    a(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(fine_to_coarse_[f])) = 1.0;
  }
  return a;
}

ZoneDecomposition build_zones(const GridGeometry& parameter_grid, std::span<const ZoneSpec> specs) {
  parameter_grid.validate();
  if (specs.empty()) throw ValidationError("zone list is empty");
  ZoneDecomposition d;
  d.fine_nx_ = parameter_grid.nx;
  d.fine_nz_ = parameter_grid.nz;
  std::size_t row = 0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const ZoneSpec& s = specs[k];
    const std::string name = "zone " + std::to_string(k + 1);
    if (s.ratio_x < 1 || s.ratio_z < 1) throw ValidationError(name + ": ratios must be >= 1");
    const double rows_exact = s.depth_m / parameter_grid.h3;
    const double rows_rounded = std::round(rows_exact);
    if (!(rows_rounded >= 1.0) || std::abs(rows_exact - rows_rounded) > 1e-6) {
      throw ValidationError(name + ": depth " + std::to_string(s.depth_m) +
                            " m is not a whole number of parameter rows");
    }
    const auto rows = static_cast<std::size_t>(rows_rounded);
    if (row + rows > parameter_grid.nz) {
      throw ValidationError(name + ": zones extend below the bottom of the grid");
    }
    Zone z;
    z.row_begin = row;
    z.row_end = row + rows;
    z.ratio_x = s.ratio_x;
    z.ratio_z = s.ratio_z;
    z.coarse_cols = std::max<std::size_t>(1, parameter_grid.nx / s.ratio_x);
    z.coarse_rows = std::max<std::size_t>(1, rows / s.ratio_z);
    d.zones_.push_back(z);
    row += rows;
  }
  if (row != parameter_grid.nz) {
    throw ValidationError("zones cover " + std::to_string(row) + " rows but the grid has " +
                          std::to_string(parameter_grid.nz));
  }
  d.finalize();
  return d;
}

Eigen::MatrixXd restrict_jacobian(const Eigen::MatrixXd& fine_columns, const ZoneDecomposition& map) {
  if (static_cast<std::size_t>(fine_columns.cols()) != map.fine_count()) {
    throw ValidationError("restrict_jacobian: column count does not match the fine grid");
  }
  Eigen::MatrixXd coarse = Eigen::MatrixXd::Zero(fine_columns.rows(),
                                                 static_cast<Eigen::Index>(map.coarse_count()));
  for (std::size_t c = 0; c < map.coarse_count(); ++c) {
    auto col = coarse.col(static_cast<Eigen::Index>(c));
    for (std::size_t f : map.members(c)) col += fine_columns.col(static_cast<Eigen::Index>(f));
  }
  return coarse;
}

Eigen::MatrixXd restrict_hessian(const Eigen::MatrixXd& fine_hessian, const ZoneDecomposition& map) {
  const auto n = static_cast<Eigen::Index>(map.fine_count());
  if (fine_hessian.rows() != n || fine_hessian.cols() != n) {
    throw ValidationError("restrict_hessian: matrix size does not match the fine grid");
  }
  const Eigen::MatrixXd half = restrict_jacobian(fine_hessian, map);
  const Eigen::MatrixXd coarse_t = restrict_jacobian(half.transpose(), map);
  return coarse_t.transpose();
}

std::vector<double> prolong(std::span<const double> coarse, const ZoneDecomposition& map) {
  if (coarse.size() != map.coarse_count()) {
    throw ValidationError("prolong: vector length does not match the coarse count");
  }
  std::vector<double> fine(map.fine_count());
  for (std::size_t f = 0; f < fine.size(); ++f) fine[f] = coarse[map.coarse_of(f)];
  return fine;
}

std::vector<double> restrict_mean(std::span<const double> fine, const ZoneDecomposition& map) {
  if (fine.size() != map.fine_count()) {
    throw ValidationError("restrict_mean: vector length does not match the fine count");
  }
  std::vector<double> coarse(map.coarse_count(), 0.0);
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    double sum = 0.0;
    for (std::size_t f : map.members(c)) sum += fine[f];
    coarse[c] = sum / static_cast<double>(map.members(c).size());
  }
  return coarse;
}

}  // namespace seisgn
