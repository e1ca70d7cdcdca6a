#include "seisgn/parameters.hpp"

#include <string>

#include "seisgn/error.hpp"

namespace seisgn {

ParameterGrid::ParameterGrid(GridGeometry fd, std::size_t ratio) : fd_(fd), ratio_(ratio) {
  fd_.validate();
  if (ratio < 1) throw ValidationError("parameter cell ratio must be >= 1");
  if (fd.nx % ratio != 0 || fd.nz % ratio != 0) {
    throw ValidationError("FD grid " + std::to_string(fd.nx) + "x" + std::to_string(fd.nz) +
                          " is not divisible by the parameter ratio " + std::to_string(ratio));
  }
  const auto r = static_cast<double>(ratio);
  param_ = GridGeometry{fd.nx / ratio, fd.nz / ratio, fd.h1 * r, fd.h3 * r};
  param_.validate();
}

Field2D ParameterGrid::expand(const Field2D& param_field) const {
  if (param_field.nx() != param_.nx || param_field.nz() != param_.nz) {
    throw ValidationError("expand: field does not match the parameter grid");
  }
  Field2D out(fd_.nx, fd_.nz);
  for (std::size_t j = 0; j < fd_.nz; ++j) {
    for (std::size_t i = 0; i < fd_.nx; ++i) out(i, j) = param_field(i / ratio_, j / ratio_);
  }
  return out;
}

Field2D ParameterGrid::average(const Field2D& fd_field) const {
  if (fd_field.nx() != fd_.nx || fd_field.nz() != fd_.nz) {
    throw ValidationError("average: field does not match the FD grid");
  }
  Field2D out(param_.nx, param_.nz);
  const double inv = 1.0 / static_cast<double>(ratio_ * ratio_);
  for (std::size_t pj = 0; pj < param_.nz; ++pj) {
    for (std::size_t pi = 0; pi < param_.nx; ++pi) {
      double sum = 0.0;
      for (std::size_t dj = 0; dj < ratio_; ++dj) {
        for (std::size_t di = 0; di < ratio_; ++di) sum += fd_field(pi * ratio_ + di, pj * ratio_ + dj);
      }
      out(pi, pj) = sum * inv;
    }
  }
  return out;
}

ElasticModel ParameterGrid::expand(const ElasticModel& m) const {
  return ElasticModel(fd_, expand(m.rho), expand(m.vs), expand(m.vp));
}

ElasticModel ParameterGrid::average(const ElasticModel& m) const {
  return ElasticModel(param_, average(m.rho), average(m.vs), average(m.vp));
}

ParameterizedModel ParameterizedModel::from_parameter_model(const ParameterGrid& grid,
                                                             const ElasticModel& m) {
  if (!(m.geometry == grid.coarse())) {
    throw ValidationError("model grid does not match the parameter grid");
  }
  m.validate();
  return {grid, m.rho, m.vs, m.vp};
}

ElasticModel ParameterizedModel::parameter_model() const {
  return ElasticModel(grid.coarse(), rho, vs, vp);
}

ElasticModel ParameterizedModel::fd_model() const {
  return ElasticModel(grid.fd(), grid.expand(rho), grid.expand(vs), grid.expand(vp));
}

ParameterVector flatten(const Field2D& field, const ZoneDecomposition& zones, ParameterClass cls) {
  if (field.nx() != zones.fine_nx() || field.nz() != zones.fine_nz()) {
    throw ValidationError("flatten: grid is " + std::to_string(field.nx()) + "x" +
                          std::to_string(field.nz()) + " but the decomposition expects " +
                          std::to_string(zones.fine_nx()) + "x" + std::to_string(zones.fine_nz()));
  }
  return {cls, restrict_mean(field.values(), zones)};
}

Field2D unflatten(const ParameterVector& params, const ZoneDecomposition& zones) {
  const std::vector<double> fine = prolong(params.values, zones);
  Field2D out(zones.fine_nx(), zones.fine_nz());
  std::copy(fine.begin(), fine.end(), out.values().begin());
  return out;
}

}  // namespace seisgn
