#pragma once

// Plain-text file formats. Every file starts with the line "# seisgn-v1".
//
//   grid:   "# nx=<int> nz=<int> h1=<m> h3=<m> field=<name>", then nz rows of
//           nx comma-separated values, top row first
//   record: "# shot=<i> nr=<int> nt=<int> dt=<s>", then nt rows of nr values
//   log:    "iteration,fc_hz,misfit,normalized_misfit,alpha,wall_seconds" rows
//
// Numbers are written with 17 significant digits and parsed without locale.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "seisgn/forward.hpp"
#include "seisgn/grid.hpp"
#include "seisgn/inversion.hpp"
#include "seisgn/model.hpp"

namespace seisgn {

inline constexpr std::string_view kFormatLine = "# seisgn-v1";

std::string format_number(double v);
/// Strict parse of a whole token; throws ValidationError naming `what`.
double parse_number(std::string_view token, std::string_view what);

struct GridFile {
  GridGeometry geometry;
  std::string field;
  Field2D values;
  bool operator==(const GridFile&) const = default;
};

void write_grid(std::ostream& out, const GridFile& grid);
GridFile read_grid(std::istream& in, std::string_view source = "<stream>");

void write_record(std::ostream& out, const ShotRecord& record);
ShotRecord read_record(std::istream& in, std::string_view source = "<stream>");

void write_log(std::ostream& out, const std::vector<IterationRecord>& history);
/// Reads back the logged columns (alpha_vp and retry flags are not logged).
std::vector<IterationRecord> read_log(std::istream& in, std::string_view source = "<stream>");

// File helpers. Writers create parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

/// rho.csv, vs.csv and vp.csv in `dir`.
void write_model(const std::filesystem::path& dir, const ElasticModel& model);
ElasticModel read_model(const std::filesystem::path& dir);

std::filesystem::path record_path(const std::filesystem::path& dir, std::size_t shot);
void write_records(const std::filesystem::path& dir, const std::vector<ShotRecord>& records);
std::vector<ShotRecord> read_records(const std::filesystem::path& dir, std::size_t shots);

/// Directory name for one center frequency, e.g. "fc_10".
std::string frequency_dir(double fc);

}  // namespace seisgn
