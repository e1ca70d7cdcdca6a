#pragma once

// Depth-zoned coarsening of the inversion parameter grid. Deeper zones merge
// blocks of ratio_x by ratio_z fine cells into one unknown; Jacobian columns
// of merged cells are summed and coarse updates are injected back.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "seisgn/grid.hpp"

namespace seisgn {

struct ZoneSpec {
  double depth_m = 0.0;  // thickness of the band
  std::size_t ratio_x = 1;
  std::size_t ratio_z = 1;
  bool operator==(const ZoneSpec&) const = default;
};

struct Zone {
  std::size_t row_begin = 0;  // fine rows [row_begin, row_end)
  std::size_t row_end = 0;
  std::size_t ratio_x = 1;
  std::size_t ratio_z = 1;
  std::size_t coarse_cols = 0;
  std::size_t coarse_rows = 0;
  std::size_t coarse_offset = 0;  // first coarse index of this zone

  std::size_t coarse_count() const { return coarse_cols * coarse_rows; }
};

/// Partition of the fine parameter grid into coarse cells. Coarse indices run
/// zone by zone from the top, row-major inside each zone. When a zone's width
/// or height is not a multiple of its ratio, the remainder joins the last
/// coarse column or row.
class ZoneDecomposition {
 public:
  ZoneDecomposition() = default;

  /// Every fine cell is its own coarse cell.
  static ZoneDecomposition identity(std::size_t nx, std::size_t nz);

  std::size_t fine_nx() const { return fine_nx_; }
  std::size_t fine_nz() const { return fine_nz_; }
  std::size_t fine_count() const { return fine_to_coarse_.size(); }
  std::size_t coarse_count() const { return members_.size(); }
  const std::vector<Zone>& zones() const { return zones_; }

  /// Fine index is j * nx + i.
  std::size_t coarse_of(std::size_t fine_index) const { return fine_to_coarse_[fine_index]; }
  std::span<const std::size_t> fine_to_coarse() const { return fine_to_coarse_; }
  const std::vector<std::size_t>& members(std::size_t coarse) const { return members_[coarse]; }

  /// Zone index and (col, row) of a coarse cell inside its zone.
  struct CoarsePosition {
    std::size_t zone = 0;
    std::size_t col = 0;
    std::size_t row = 0;
  };
  CoarsePosition position(std::size_t coarse) const;

  /// Dense 0/1 aggregation matrix A (fine_count x coarse_count).
  Eigen::MatrixXd aggregation_matrix() const;

  bool is_identity() const { return coarse_count() == fine_count(); }

 private:
  friend ZoneDecomposition build_zones(const GridGeometry&, std::span<const ZoneSpec>);
  void finalize();

  std::size_t fine_nx_ = 0;
  std::size_t fine_nz_ = 0;
  std::vector<Zone> zones_;
  std::vector<std::size_t> fine_to_coarse_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Builds the decomposition for a parameter grid (nx, nz, h3 is the row
/// height). Zone thicknesses must be whole rows and sum to the grid depth.
ZoneDecomposition build_zones(const GridGeometry& parameter_grid, std::span<const ZoneSpec> specs);

/// J_coarse = J_fine A: columns of merged cells are summed in ascending fine order.
Eigen::MatrixXd restrict_jacobian(const Eigen::MatrixXd& fine_columns, const ZoneDecomposition& map);

/// H_coarse = A^T H_fine A.
Eigen::MatrixXd restrict_hessian(const Eigen::MatrixXd& fine_hessian, const ZoneDecomposition& map);

/// Piecewise-constant injection of coarse values onto fine cells.
std::vector<double> prolong(std::span<const double> coarse, const ZoneDecomposition& map);

/// Mean of fine values over each coarse cell.
std::vector<double> restrict_mean(std::span<const double> fine, const ZoneDecomposition& map);

}  // namespace seisgn
