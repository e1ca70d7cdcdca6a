#include "seisgn/config.hpp"

#include <cmath>
#include <map>
#include <string>
#include <variant>

#include "seisgn/error.hpp"
#include "seisgn/io.hpp"

namespace seisgn {
namespace {

struct Value {
  enum class Kind { Atom, List, Tuple };
  Kind kind = Kind::Atom;
  std::string atom;
  bool quoted = false;
  std::vector<Value> items;
};

struct Entry {
  Value value;
  std::size_t line = 0;
  bool used = false;
};

class ValueParser {
 public:
  ValueParser(std::string_view text, std::string key) : text_(text), key_(std::move(key)) {}

  Value parse() {
    Value v = parse_value();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing text");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("key '" + key_ + "': " + msg);
  }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  Value parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '[' || c == '(') return parse_sequence(c == '[' ? ']' : ')');
    if (c == '"') {
      const std::size_t end = text_.find('"', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated string");
      Value v;
      v.atom = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
      v.quoted = true;
      pos_ = end + 1;
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != ')' &&
           text_[pos_] != '[' && text_[pos_] != '(') {
      ++pos_;
    }
    Value v;
    std::string_view raw = text_.substr(start, pos_ - start);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    if (raw.empty()) fail("empty value");
    v.atom = std::string(raw);
    return v;
  }
  Value parse_sequence(char close) {
    Value v;
    v.kind = close == ']' ? Value::Kind::List : Value::Kind::Tuple;
    ++pos_;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == close) {
      ++pos_;
      return v;
    }
    while (true) {
      v.items.push_back(parse_value());
      skip_space();
      if (pos_ >= text_.size()) fail(std::string("missing '") + close + "'");
      if (text_[pos_] == close) {
        ++pos_;
        return v;
      }
      if (text_[pos_] != ',') fail("expected ',' between items");
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::string key_;
};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '[' || c == '(') ++depth;
    if (c == ']' || c == ')') --depth;
  }
  return depth;
}

class Entries {
 public:
  explicit Entries(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::string pending;
    std::size_t pending_line = 0;
    while (pos <= text.size()) {
      const std::size_t end = text.find('\n', pos);
      std::string line(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
      pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
      ++line_no;
      line = strip_comment(line);
      if (pending.empty()) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        pending_line = line_no;
        pending = line;
      } else {
        pending += ' ' + line;
      }
      if (bracket_balance(pending) > 0 && pos <= text.size()) continue;
      add(pending, pending_line);
      pending.clear();
    }
    if (!pending.empty()) add(pending, pending_line);
  }

  const Value* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  }

  std::size_t line_of(const std::string& key) const { return entries_.at(key).line; }

  void reject_unknown() const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) {
        throw ValidationError("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  void add(const std::string& raw, std::size_t line) {
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    std::string key = raw.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    if (key.empty()) throw ValidationError("line " + std::to_string(line) + ": empty key");
    if (entries_.count(key)) {
      throw ValidationError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    try {
      entries_[key] = Entry{ValueParser(std::string_view(raw).substr(eq + 1), key).parse(), line, false};
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  }

  std::map<std::string, Entry> entries_;
};

[[noreturn]] void type_error(const std::string& key, const std::string& expected) {
  throw ValidationError("key '" + key + "': expected " + expected);
}

double as_number(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::Atom || v.quoted) type_error(key, "a number");
  try {
    return parse_number(v.atom, key);
  } catch (const ValidationError&) {
    type_error(key, "a number");
  }
}

std::size_t as_count(const Value& v, const std::string& key) {
  const double d = as_number(v, key);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1e15) type_error(key, "a non-negative integer");
  return static_cast<std::size_t>(d);
}

std::vector<double> as_numbers(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::List) type_error(key, "a list of numbers");
  std::vector<double> out;
  for (const Value& item : v.items) out.push_back(as_number(item, key));
  return out;
}

std::vector<std::vector<double>> as_tuples(const Value& v, const std::string& key, std::size_t min_len,
                                           std::size_t max_len) {
  if (v.kind != Value::Kind::List) type_error(key, "a list of tuples");
  std::vector<std::vector<double>> out;
  for (const Value& item : v.items) {
    if (item.kind != Value::Kind::Tuple || item.items.size() < min_len || item.items.size() > max_len) {
      type_error(key, "tuples of " + std::to_string(min_len) +
                          (min_len == max_len ? "" : "-" + std::to_string(max_len)) + " numbers");
    }
    std::vector<double> t;
    for (const Value& x : item.items) t.push_back(as_number(x, key));
    out.push_back(std::move(t));
  }
  return out;
}

std::string as_string(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::Atom) type_error(key, "a string");
  return v.atom;
}

bool as_bool(const Value& v, const std::string& key) {
  const std::string s = as_string(v, key);
  if (s == "true") return true;
  if (s == "false") return false;
  type_error(key, "true or false");
}

void range_error(const std::string& key, const std::string& rule) {
  throw ValidationError("key '" + key + "' out of range: " + rule);
}

std::size_t whole_cells(double extent, double step, const std::string& key) {
  const double n = extent / step;
  const double r = std::round(n);
  if (r < 2.0 || std::abs(n - r) > 1e-6) range_error(key, "must be a whole number (>= 2) of fd_step_m cells");
  return static_cast<std::size_t>(r);
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  Entries e(text);
  RunConfig c;
  c.base_dir = base_dir;

  auto required = [&](const std::string& key) -> const Value& {
    const Value* v = e.find(key);
    if (!v) throw ValidationError("missing required key '" + key + "'");
    return *v;
  };
  auto number = [&](const std::string& key, double& out) {
    if (const Value* v = e.find(key)) out = as_number(*v, key);
  };
  auto path = [&](const std::string& key, std::optional<std::filesystem::path>& out) {
    if (const Value* v = e.find(key)) {
      std::filesystem::path p = as_string(*v, key);
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) {
        throw ValidationError("key '" + key + "': path " + p.string() + " does not exist");
      }
      out = p;
    }
  };

  c.length_m = as_number(required("length_m"), "length_m");
  c.depth_m = as_number(required("depth_m"), "depth_m");
  c.fd_step_m = as_number(required("fd_step_m"), "fd_step_m");
  if (!(c.fd_step_m > 0.0)) range_error("fd_step_m", "must be > 0");
  if (!(c.length_m > 0.0)) range_error("length_m", "must be > 0");
  if (!(c.depth_m > 0.0)) range_error("depth_m", "must be > 0");
  if (const Value* v = e.find("param_ratio")) c.param_ratio = as_count(*v, "param_ratio");
  if (c.param_ratio < 1) range_error("param_ratio", "must be >= 1");
  const std::size_t nx = whole_cells(c.length_m, c.fd_step_m, "length_m");
  const std::size_t nz = whole_cells(c.depth_m, c.fd_step_m, "depth_m");
  if (nx % c.param_ratio || nz % c.param_ratio) {
    range_error("param_ratio", "must divide the FD grid size " + std::to_string(nx) + "x" + std::to_string(nz));
  }

  number("density", c.density);
  if (!(c.density > 0.0)) range_error("density", "must be > 0");
  number("poisson", c.true_model.poisson);
  if (!(c.true_model.poisson > 0.0 && c.true_model.poisson < 0.5)) range_error("poisson", "must lie in (0, 0.5)");
  if (const Value* v = e.find("layers")) {
    for (const auto& t : as_tuples(*v, "layers", 2, 3)) {
      c.true_model.layers.push_back({t[0], t[1], t.size() > 2 ? t[2] : c.density});
    }
  }
  double void_vp = 300.0;
  number("void_vp", void_vp);
  if (!(void_vp > 0.0)) range_error("void_vp", "must be > 0");
  if (const Value* v = e.find("voids")) {
    for (const auto& t : as_tuples(*v, "voids", 4, 4)) c.true_model.voids.push_back({t[0], t[1], t[2], t[3], void_vp});
  }
  path("model_dir", c.model_dir);
  path("observed_dir", c.observed_dir);
  path("initial_model", c.initial_model_dir);
  if (c.true_model.layers.empty() && !c.model_dir) {
    throw ValidationError("missing required key 'layers' (or 'model_dir')");
  }
  number("initial_vs_top", c.initial_vs_top);
  number("initial_vs_bottom", c.initial_vs_bottom);
  if (!(c.initial_vs_top >= 0.0)) range_error("initial_vs_top", "must be >= 0");
  if (!(c.initial_vs_bottom >= 0.0)) range_error("initial_vs_bottom", "must be >= 0");

  c.acquisition.sources = as_numbers(required("sources"), "sources");
  c.acquisition.receivers = as_numbers(required("receivers"), "receivers");
  if (const Value* v = e.find("reference_receiver")) c.acquisition.reference_receiver = as_count(*v, "reference_receiver");
  try {
    c.acquisition.validate(GridGeometry{nx, nz, c.fd_step_m, c.fd_step_m});
  } catch (const ValidationError& err) {
    throw ValidationError(std::string("acquisition (sources/receivers/reference_receiver): ") + err.what());
  }

  c.duration_s = as_number(required("duration_s"), "duration_s");
  if (!(c.duration_s > 0.0)) range_error("duration_s", "must be > 0");
  number("safety", c.safety);
  if (!(c.safety > 0.0 && c.safety <= 1.0)) range_error("safety", "must lie in (0, 1]");
  number("vp_cap", c.vp_cap);
  if (!(c.vp_cap > 0.0)) range_error("vp_cap", "must be > 0");
  if (const Value* v = e.find("t0_s")) {
    c.t0_s = as_number(*v, "t0_s");
    if (!(*c.t0_s >= 0.0)) range_error("t0_s", "must be >= 0");
  }

  if (const Value* v = e.find("frequencies")) c.schedule.frequencies = as_numbers(*v, "frequencies");
  if (const Value* v = e.find("max_iterations")) c.schedule.max_iterations = as_count(*v, "max_iterations");
  number("plateau_tolerance", c.schedule.plateau_tolerance);
  try {
    c.schedule.validate();
  } catch (const ValidationError& err) {
    throw ValidationError(std::string("key 'frequencies'/'max_iterations'/'plateau_tolerance': ") + err.what());
  }
  number("lambda1", c.regularization.lambda1);
  if (!(c.regularization.lambda1 >= 0.0)) range_error("lambda1", "must be >= 0");
  number("lambda2", c.regularization.lambda2);
  if (!(c.regularization.lambda2 >= 0.0)) range_error("lambda2", "must be >= 0");

  if (const Value* v = e.find("zones")) {
    for (const auto& t : as_tuples(*v, "zones", 3, 3)) {
      if (t[1] < 1 || t[2] < 1 || t[1] != std::floor(t[1]) || t[2] != std::floor(t[2])) {
        range_error("zones", "ratios must be integers >= 1");
      }
      c.zones.push_back({t[0], static_cast<std::size_t>(t[1]), static_cast<std::size_t>(t[2])});
    }
    try {
      (void)c.zone_decomposition();
    } catch (const ValidationError& err) {
      throw ValidationError(std::string("key 'zones': ") + err.what());
    }
  }
  number("perturbation_fraction", c.perturbation.fraction);
  number("perturbation_floor", c.perturbation.floor);
  try {
    c.perturbation.validate();
  } catch (const ValidationError& err) {
    throw ValidationError(std::string("key 'perturbation_fraction'/'perturbation_floor': ") + err.what());
  }
  if (const Value* v = e.find("jacobian_mode")) {
    const std::string mode = as_string(*v, "jacobian_mode");
    if (mode == "direct") {
      c.jacobian_mode = JacobianMode::Direct;
    } else if (mode == "restrict") {
      c.jacobian_mode = JacobianMode::Restrict;
    } else {
      range_error("jacobian_mode", "must be 'direct' or 'restrict'");
    }
  }
  if (const Value* v = e.find("record_wall_time")) c.record_wall_time = as_bool(*v, "record_wall_time");

  e.reject_unknown();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  } catch (const ValidationError& err) {
    throw ValidationError(path.string() + ": " + err.what());
  }
}

void apply_survey_file(RunConfig& config, const std::filesystem::path& path) {
  try {
    Entries e(read_text_file(path));
    AcquisitionGeometry acq = config.acquisition;
    if (const Value* v = e.find("sources")) acq.sources = as_numbers(*v, "sources");
    if (const Value* v = e.find("receivers")) acq.receivers = as_numbers(*v, "receivers");
    if (const Value* v = e.find("reference_receiver")) acq.reference_receiver = as_count(*v, "reference_receiver");
    if (const Value* v = e.find("duration_s")) {
      const double d = as_number(*v, "duration_s");
      if (!(d > 0.0)) range_error("duration_s", "must be > 0");
      config.duration_s = d;
    }
    if (const Value* v = e.find("t0_s")) {
      const double t0 = as_number(*v, "t0_s");
      if (!(t0 >= 0.0)) range_error("t0_s", "must be >= 0");
      config.t0_s = t0;
    }
    e.reject_unknown();
    acq.validate(config.fd_grid());
    config.acquisition = std::move(acq);
  } catch (const ValidationError& err) {
    throw ValidationError(path.string() + ": " + err.what());
  }
}

GridGeometry RunConfig::fd_grid() const {
  const auto nx = static_cast<std::size_t>(std::round(length_m / fd_step_m));
  const auto nz = static_cast<std::size_t>(std::round(depth_m / fd_step_m));
  GridGeometry g{nx, nz, fd_step_m, fd_step_m};
  g.validate();
  return g;
}

ParameterGrid RunConfig::parameter_grid() const { return ParameterGrid(fd_grid(), param_ratio); }

TimeAxis RunConfig::time_axis() const {
  return make_time_axis(duration_s, stable_dt(vp_cap, fd_grid(), safety));
}

Survey RunConfig::survey(double fc) const {
  SourceWavelet w = SourceWavelet::centered(fc);
  if (t0_s) w.t0 = *t0_s;
  return Survey{acquisition, w, time_axis()};
}

ZoneDecomposition RunConfig::zone_decomposition() const {
  const GridGeometry p = parameter_grid().coarse();
  if (zones.empty()) return ZoneDecomposition::identity(p.nx, p.nz);
  return build_zones(p, zones);
}

ElasticModel RunConfig::true_fd_model() const {
  const ParameterGrid grid = parameter_grid();
  ElasticModel m;
  if (model_dir) {
    m = read_model(*model_dir);
    if (!(m.geometry == grid.fd())) {
      throw ValidationError("model in " + model_dir->string() + " does not match the configured FD grid");
    }
  } else {
    m = grid.expand(build_layered_void_model(true_model, grid.coarse()));
  }
  if (m.vp.max() > vp_cap) {
    throw ValidationError("key 'vp_cap': model vp " + format_number(m.vp.max()) + " exceeds vp_cap");
  }
  return m;
}

ParameterizedModel RunConfig::initial_model() const {
  const ParameterGrid grid = parameter_grid();
  ElasticModel m;
  if (initial_model_dir) {
    const ElasticModel fd = read_model(*initial_model_dir);
    if (!(fd.geometry == grid.fd())) {
      throw ValidationError("initial model does not match the configured FD grid");
    }
    m = grid.average(fd);
  } else {
    m = build_gradient_model(grid.coarse(), initial_vs_top, initial_vs_bottom, true_model.poisson, density);
  }
  if (m.vp.max() > vp_cap) throw ValidationError("key 'vp_cap': initial model exceeds vp_cap");
  return ParameterizedModel::from_parameter_model(grid, m);
}

InversionSettings RunConfig::inversion_settings() const {
  InversionSettings s;
  s.regularization = regularization;
  s.perturbation = perturbation;
  s.zones = zone_decomposition();
  s.schedule = schedule;
  s.jacobian_mode = jacobian_mode;
  s.vp_cap = vp_cap;
  s.record_wall_time = record_wall_time;
  return s;
}

}  // namespace seisgn
