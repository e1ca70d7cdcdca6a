#include "seisgn/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "seisgn/error.hpp"

namespace seisgn {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_count(std::string_view token, std::string_view what) {
  std::size_t v = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
  }
  return v;
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  std::string require(std::string_view what) {
    std::string line;
    if (!next(line)) fail("unexpected end of file, expected " + std::string(what));
    return line;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

void expect_format_line(LineReader& r) {
  if (trim(r.require("format line")) != kFormatLine) r.fail("missing '# seisgn-v1' format line");
}

// Parses "# a=1 b=2 ..." into ordered key/value pairs.
std::vector<std::pair<std::string_view, std::string_view>> header_fields(LineReader& r,
                                                                         std::string_view line) {
  line = trim(line);
  if (line.empty() || line.front() != '#') r.fail("expected a '#' header line");
  line.remove_prefix(1);
  std::vector<std::pair<std::string_view, std::string_view>> out;
  for (std::string_view tok : split(trim(line), ' ')) {
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) r.fail("malformed header field '" + std::string(tok) + "'");
    out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return out;
}

std::string_view header_value(LineReader& r,
                              const std::vector<std::pair<std::string_view, std::string_view>>& f,
                              std::string_view key) {
  for (const auto& [k, v] : f) {
    if (k == key) return v;
  }
  r.fail("header is missing '" + std::string(key) + "'");
}

void write_row(std::ostream& out, const double* values, std::size_t n, std::size_t stride) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ',';
    out << format_number(values[i * stride]);
  }
  out << '\n';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw ValidationError("cannot format number");
  return std::string(buf, ptr);
}

double parse_number(std::string_view token, std::string_view what) {
  token = trim(token);
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError("cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
  }
  return v;
}

void write_grid(std::ostream& out, const GridFile& g) {
  out << kFormatLine << '\n';
  out << "# nx=" << g.geometry.nx << " nz=" << g.geometry.nz << " h1=" << format_number(g.geometry.h1)
      << " h3=" << format_number(g.geometry.h3) << " field=" << g.field << '\n';
  for (std::size_t j = 0; j < g.geometry.nz; ++j) {
    write_row(out, g.values.values().data() + j * g.geometry.nx, g.geometry.nx, 1);
  }
}

GridFile read_grid(std::istream& in, std::string_view source) {
  LineReader r(in, source);
  expect_format_line(r);
  const std::string header = r.require("grid header");
  const auto fields = header_fields(r, header);
  GridFile g;
  try {
    g.geometry.nx = parse_count(header_value(r, fields, "nx"), "nx");
    g.geometry.nz = parse_count(header_value(r, fields, "nz"), "nz");
    g.geometry.h1 = parse_number(header_value(r, fields, "h1"), "h1");
    g.geometry.h3 = parse_number(header_value(r, fields, "h3"), "h3");
    g.geometry.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  g.field = std::string(header_value(r, fields, "field"));
  g.values = Field2D(g.geometry.nx, g.geometry.nz);
  for (std::size_t j = 0; j < g.geometry.nz; ++j) {
    const std::string line = r.require("grid row");
    const auto cells = split(line, ',');
    if (cells.size() != g.geometry.nx) {
      r.fail("expected " + std::to_string(g.geometry.nx) + " values, found " + std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        g.values(i, j) = parse_number(cells[i], "grid value");
      } catch (const ValidationError& e) {
        r.fail(e.what());
      }
    }
  }
  return g;
}

void write_record(std::ostream& out, const ShotRecord& rec) {
  out << kFormatLine << '\n';
  out << "# shot=" << rec.shot << " nr=" << rec.nr << " nt=" << rec.nt << " dt=" << format_number(rec.dt)
      << '\n';
  for (std::size_t k = 0; k < rec.nt; ++k) write_row(out, rec.samples.data() + k, rec.nr, rec.nt);
}

ShotRecord read_record(std::istream& in, std::string_view source) {
  LineReader r(in, source);
  expect_format_line(r);
  const std::string header = r.require("record header");
  const auto fields = header_fields(r, header);
  ShotRecord rec;
  try {
    const std::size_t shot = parse_count(header_value(r, fields, "shot"), "shot");
    const std::size_t nr = parse_count(header_value(r, fields, "nr"), "nr");
    const std::size_t nt = parse_count(header_value(r, fields, "nt"), "nt");
    const double dt = parse_number(header_value(r, fields, "dt"), "dt");
    if (nr == 0 || nt == 0 || !(dt > 0.0)) throw ValidationError("record needs nr, nt > 0 and dt > 0");
    rec = ShotRecord(shot, nr, nt, dt);
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  for (std::size_t k = 0; k < rec.nt; ++k) {
    const std::string line = r.require("record row");
    const auto cells = split(line, ',');
    if (cells.size() != rec.nr) {
      r.fail("expected " + std::to_string(rec.nr) + " values, found " + std::to_string(cells.size()));
    }
    for (std::size_t q = 0; q < rec.nr; ++q) {
      try {
        rec.samples[q * rec.nt + k] = parse_number(cells[q], "trace sample");
      } catch (const ValidationError& e) {
        r.fail(e.what());
      }
    }
  }
  return rec;
}

void write_log(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << kFormatLine << '\n';
  out << "iteration,fc_hz,misfit,normalized_misfit,alpha,wall_seconds\n";
  for (const IterationRecord& h : history) {
    out << h.iteration << ',' << format_number(h.fc) << ',' << format_number(h.misfit) << ','
        << format_number(h.normalized_misfit) << ',' << format_number(h.alpha) << ','
        << format_number(h.wall_seconds) << '\n';
  }
}

std::vector<IterationRecord> read_log(std::istream& in, std::string_view source) {
  LineReader r(in, source);
  expect_format_line(r);
  if (trim(r.require("log header")) != "iteration,fc_hz,misfit,normalized_misfit,alpha,wall_seconds") {
    r.fail("unexpected log header");
  }
  std::vector<IterationRecord> out;
  std::string line;
  while (r.next(line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) r.fail("expected 6 columns");
    try {
      IterationRecord h;
      h.iteration = parse_count(cells[0], "iteration");
      h.fc = parse_number(cells[1], "fc_hz");
      h.misfit = parse_number(cells[2], "misfit");
      h.normalized_misfit = parse_number(cells[3], "normalized_misfit");
      h.alpha = parse_number(cells[4], "alpha");
      h.wall_seconds = parse_number(cells[5], "wall_seconds");
      out.push_back(h);
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_model(const std::filesystem::path& dir, const ElasticModel& model) {
  const std::pair<const char*, const Field2D*> fields[] = {
      {"rho", &model.rho}, {"vs", &model.vs}, {"vp", &model.vp}};
  for (const auto& [name, f] : fields) {
    std::ostringstream ss;
    write_grid(ss, GridFile{model.geometry, name, *f});
    write_text_file(dir / (std::string(name) + ".csv"), ss.str());
  }
}

ElasticModel read_model(const std::filesystem::path& dir) {
  auto load = [&](const char* name) {
    const std::filesystem::path p = dir / (std::string(name) + ".csv");
    std::istringstream ss(read_text_file(p));
    GridFile g = read_grid(ss, p.string());
    if (g.field != name) throw ValidationError(p.string() + ": field is '" + g.field + "', expected " + name);
    return g;
  };
  GridFile rho = load("rho"), vs = load("vs"), vp = load("vp");
  if (!(rho.geometry == vs.geometry) || !(rho.geometry == vp.geometry)) {
    throw ValidationError(dir.string() + ": model grids disagree");
  }
  return ElasticModel(rho.geometry, std::move(rho.values), std::move(vs.values), std::move(vp.values));
}

std::filesystem::path record_path(const std::filesystem::path& dir, std::size_t shot) {
  char name[32];
  std::snprintf(name, sizeof name, "shot_%03zu.csv", shot);
  return dir / name;
}

void write_records(const std::filesystem::path& dir, const std::vector<ShotRecord>& records) {
  for (const ShotRecord& rec : records) {
    std::ostringstream ss;
    write_record(ss, rec);
    write_text_file(record_path(dir, rec.shot), ss.str());
  }
}

std::vector<ShotRecord> read_records(const std::filesystem::path& dir, std::size_t shots) {
  std::vector<ShotRecord> out;
  out.reserve(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    const auto p = record_path(dir, s);
    std::istringstream ss(read_text_file(p));
    out.push_back(read_record(ss, p.string()));
    if (out.back().shot != s) throw ValidationError(p.string() + ": shot index does not match file name");
  }
  return out;
}

std::string frequency_dir(double fc) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, fc);
  if (ec != std::errc()) throw ValidationError("cannot format frequency");
  return "fc_" + std::string(buf, ptr);
}

}  // namespace seisgn
