#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "seisgn/config.hpp"

namespace seisgn {

/// Writes the true FD model to `out` and the starting model to `out/initial`.
void cmd_make_model(const RunConfig& config, const std::filesystem::path& out);

/// Synthesizes shot records into `out/fc_<f>/shot_###.csv` for each scheduled
/// frequency (or only `fc`). `model_dir` replaces the configured true model.
void cmd_forward(const RunConfig& config, const std::filesystem::path& out,
                 const std::optional<std::filesystem::path>& model_dir = {},
                 std::optional<double> fc = {});

/// Frequency-continuation inversion. Observed data come from observed_dir
/// (one fc_<f> directory per stage) or are synthesized from the true model.
/// Writes convergence.csv, one model directory per stage and final/.
InversionState cmd_invert(const RunConfig& config, const std::filesystem::path& out);

struct BenchMode {
  std::string name;
  std::size_t parameters = 0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  std::size_t peak_block_rows = 0;
  std::size_t peak_block_cols = 0;
  double total_seconds() const { return assembly_seconds + solve_seconds; }
};

struct BenchReport {
  BenchMode regular;
  BenchMode coarsened;
  std::size_t expected_coarse = 0;  // from the zone arithmetic
  double parameter_ratio = 0.0;     // M_coarse / M_fine
  double time_ratio = 0.0;          // coarsened / regular total
};

/// One Gauss-Newton iteration (both classes) at the first scheduled
/// frequency with ratio-1 cells and with the configured zones. Writes
/// `out/bench.json`.
BenchReport cmd_bench(const RunConfig& config, const std::filesystem::path& out);

std::string to_json(const BenchReport& report);

}  // namespace seisgn
