#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "seisgn/forward.hpp"
#include "seisgn/inversion.hpp"
#include "seisgn/model.hpp"
#include "seisgn/multires.hpp"
#include "seisgn/parameters.hpp"

namespace seisgn {

/// Everything one run needs. Parsed from flat `key = value` text where lists
/// use brackets and tuples parentheses, e.g.
///   layers = [(3.0, 200), (6.0, 700)]   # (bottom depth m, vs m/s)
///   zones  = [(2.4, 1, 1), (3.6, 2, 2)] # (thickness m, ratio_x, ratio_z)
struct RunConfig {
  std::filesystem::path base_dir{"."};  // relative paths resolve against this

  double length_m = 0.0;
  double depth_m = 0.0;
  double fd_step_m = 0.0;
  std::size_t param_ratio = 1;

  LayeredModelSpec true_model;  // empty layers when model_dir is given
  double density = kDefaultDensity;
  std::optional<std::filesystem::path> model_dir;
  std::optional<std::filesystem::path> observed_dir;
  std::optional<std::filesystem::path> initial_model_dir;
  double initial_vs_top = 200.0;
  double initial_vs_bottom = 600.0;

  AcquisitionGeometry acquisition;
  double duration_s = 0.0;
  double safety = 0.9;
  double vp_cap = 2000.0;
  std::optional<double> t0_s;

  FrequencySchedule schedule;
  RegularizationConfig regularization;
  std::vector<ZoneSpec> zones;  // empty = one ratio-1 zone
  PerturbationRule perturbation;
  JacobianMode jacobian_mode = JacobianMode::Direct;
  bool record_wall_time = false;

  GridGeometry fd_grid() const;
  ParameterGrid parameter_grid() const;
  TimeAxis time_axis() const;
  Survey survey(double fc) const;
  ZoneDecomposition zone_decomposition() const;

  /// True model on the FD grid (from model_dir or the layer description).
  ElasticModel true_fd_model() const;
  /// Starting model on the parameter grid (from initial_model_dir or the
  /// depth gradient).
  ParameterizedModel initial_model() const;
  InversionSettings inversion_settings() const;
};

/// Throws ValidationError naming the offending key (and line).
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Replaces the acquisition and timing of `config` with the keys in a survey
/// file (sources, receivers, reference_receiver, duration_s, t0_s).
void apply_survey_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace seisgn
