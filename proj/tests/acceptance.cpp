// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seisgn/commands.hpp"
#include "seisgn/config.hpp"
#include "seisgn/error.hpp"
#include "seisgn/inversion.hpp"
#include "seisgn/io.hpp"
#include "support.hpp"

using namespace seisgn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("seisgn_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Outcome zone_arithmetic() {
  const auto start = Clock::now();
  const std::vector<ZoneSpec> a{{6.75, 1, 1}, {9.0, 2, 2}, {2.25, 3, 3}};
  const std::vector<ZoneSpec> b{{46.0, 1, 1}, {24.0, 2, 2}, {30.0, 3, 3}};
  const std::size_t small = build_zones(GridGeometry{66, 24, 0.75, 0.75}, a).coarse_count();
  const std::size_t large = build_zones(GridGeometry{150, 100, 1.0, 1.0}, b).coarse_count();
  const double t = seconds_since(start);
  return {small == 814 && large == 8300 && t < 1.0,
          "66x24 -> " + std::to_string(small) + ", 150x100 -> " + std::to_string(large) + " in " + num(t) + " s"};
}

Outcome hessian_streaming() {
  const auto start = Clock::now();
  // 4 x 2 parameter cells = 8 unknowns, 2 shots, 3 receivers, 64 samples.
  const seisgn::testing::ToyProblem toy(4, 2, 2, {0.25, 3.25}, {0.25, 1.75, 3.25}, 64);
  const JacobianProblem fine = toy.problem();
  const auto blocks = seisgn::testing::collect_blocks(fine, ParameterClass::Vs);
  NormalEquations streamed(8);
  for (const auto& b : blocks) streamed.add(b);
  const Eigen::MatrixXd j = assemble_dense(blocks, 2, 3);
  const Eigen::MatrixXd h = streamed.hessian();
  const double rel = (h - j.transpose() * j).norm() / h.norm();

  const std::vector<ZoneSpec> specs{{1.0, 1, 1}, {1.0, 2, 1}};
  const ZoneDecomposition zones = build_zones(toy.model.grid.coarse(), specs);
  JacobianProblem coarse = fine;
  coarse.zones = &zones;
  const NormalEquations restricted =
      assemble_normal_equations(coarse, ParameterClass::Vs, toy.residual(), JacobianMode::Restrict);
  const Eigen::MatrixXd a = zones.aggregation_matrix();
  const Eigen::MatrixXd oracle = a.transpose() * (j.transpose() * j) * a;
  const double rel_c = (restricted.hessian() - oracle).norm() / oracle.norm();
  const double t = seconds_since(start);
  return {j.rows() == 6 * 127 && j.cols() == 8 && rel <= 1e-12 && rel_c <= 1e-12 && t < 60.0,
          "|H-J^TJ|/|H| = " + num(rel) + ", |H_c-A^THA|/|H_c| = " + num(rel_c) + " in " + num(t) + " s"};
}

Outcome gradient_check() {
  const auto start = Clock::now();
  seisgn::testing::ToyProblem toy(2, 2, 4, {0.5, 3.5}, {0.25, 1.75, 3.75}, 80);
  toy.rule = PerturbationRule{1e-6, 0.0};
  const ResidualVector r = toy.residual();
  double worst = 0.0;
  for (ParameterClass cls : {ParameterClass::Vs, ParameterClass::Vp}) {
    const Eigen::VectorXd g =
        accumulate_gradient(seisgn::testing::collect_blocks(toy.problem(), cls), r);
    Eigen::VectorXd fd(4);
    for (std::size_t p = 0; p < 4; ++p) {
      const double h = 1e-4 * toy.model.field(cls).values()[p];
      auto eval = [&](double delta) {
        ParameterizedModel m = toy.model;
        m.field(cls).values()[p] += delta;
        return misfit(modified_residual(run_survey(m.fd_model(), toy.survey), toy.observed, 0));
      };
      fd[static_cast<Eigen::Index>(p)] = (eval(h) - eval(-h)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  const double t = seconds_since(start);
  return {worst <= 1e-3 && t < 300.0, "max relative |J^T r - grad_fd| = " + num(worst) + " in " + num(t) + " s"};
}

Outcome stability() {
  const auto start = Clock::now();
  const RunConfig c = load_config(fs::path(SEISGN_SOURCE_DIR) / "configs" / "full_scale.cfg");
  const ElasticModel model = c.true_fd_model();
  const StaggeredMaterial material(model);
  const double bound = stable_dt(model, model.geometry);
  const SourceWavelet w = SourceWavelet::centered(10.0);
  const SourceTerm src{surface_node(model.geometry, 24.0), 1.0};
  const ReceiverNode rec{surface_node(model.geometry, 30.0), 0};
  const double peak = 1.0;  // ricker peak times unit amplitude

  auto run = [&](double factor, double& max_field) {
    max_field = 0.0;
    try {
      simulate(material, std::span(&src, 1), w, TimeAxis{factor * bound, 2000}, std::span(&rec, 1),
               [&](std::size_t, const Wavefield& f) { max_field = std::max(max_field, f.max_abs()); });
    } catch (const NumericalError&) {
      return false;
    }
    return std::isfinite(max_field);
  };
  double stable_max = 0.0, unstable_max = 0.0;
  const bool stable_ok = run(0.99, stable_max) && stable_max < 1e3 * peak;
  const bool finite = run(1.2, unstable_max);
  const bool flagged = !finite || unstable_max > 1e6 * peak;
  const double t = seconds_since(start);
  return {stable_ok && t < 120.0,
          "0.99 bound: max |field| = " + num(stable_max) + "; 1.2 bound: " +
              (flagged ? std::string("divergence flagged") : "no divergence within 2000 steps (not asserted)") +
              (finite ? " (max " + num(unstable_max) + ")" : " (non-finite)") + " in " + num(t) + " s"};
}

Outcome micro_oracle() {
  const double h = 0.5, dt = 1e-4, rho = 2000.0, vs = 200.0, vp = 400.0;
  const StaggeredMaterial m(seisgn::testing::homogeneous_model(5, 5, h, vs, vp, rho));
  const double mu = rho * vs * vs, lam = rho * vp * vp - 2.0 * mu, p = lam + 2.0 * mu, b = 1.0 / rho, c = dt / h;
  Wavefield w(m.geometry);
  w.tzz(2, 2) = 1.0;
  step_wavefield(w, m, dt);
  Wavefield e(m.geometry);
  e.v(2, 1) = b * c;
  e.v(2, 2) = -b * c;
  const double dv[3] = {b * c, -2.0 * b * c, b * c};
  for (std::size_t k = 0; k < 3; ++k) {
    e.tzz(2, k + 1) = (k == 1 ? 1.0 : 0.0) + p * c * dv[k];
    e.txx(2, k + 1) = lam * c * dv[k];
  }
  e.txz(2, 1) = mu * c * b * c;
  e.txz(3, 1) = -mu * c * b * c;
  e.txz(2, 2) = -mu * c * b * c;
  e.txz(3, 2) = mu * c * b * c;
  double worst = 0.0;
  const Field2D* got[] = {&w.u, &w.v, &w.txx, &w.tzz, &w.txz};
  const Field2D* want[] = {&e.u, &e.v, &e.txx, &e.tzz, &e.txz};
  for (int f = 0; f < 5; ++f) {
    for (std::size_t k = 0; k < got[f]->size(); ++k) {
      const double x = want[f]->values()[k];
      worst = std::max(worst, std::abs(got[f]->values()[k] - x) / std::max(1.0, std::abs(x)));
    }
  }
  return {worst <= 1e-14, "max relative deviation " + num(worst)};
}

Outcome reciprocity() {
  const auto start = Clock::now();
  const StaggeredMaterial m(seisgn::testing::homogeneous_model(120, 60, 0.25, 200.0, 400.0));
  const SourceWavelet w = SourceWavelet::centered(60.0);
  const TimeAxis t = make_time_axis(0.06, stable_dt(400.0, m.geometry, 0.9));
  const std::size_t a = surface_node(m.geometry, 10.0), b = surface_node(m.geometry, 14.0);
  auto trace = [&](std::size_t s, std::size_t r) {
    const SourceTerm src{s, 1.0};
    const ReceiverNode rec{r, 0};
    return simulate(m, std::span(&src, 1), w, t, std::span(&rec, 1));
  };
  const std::vector<double> ab = trace(a, b), ba = trace(b, a);
  const double rel = seisgn::testing::relative_difference(ab, ba);
  const double peak = *std::max_element(ab.begin(), ab.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double tt = seconds_since(start);
  return {rel <= 1e-6 && std::abs(peak) > 0.0 && tt < 120.0,
          "relative difference " + num(rel) + " over " + std::to_string(t.nt) + " samples in " + num(tt) + " s"};
}

Outcome absorbing() {
  const auto start = Clock::now();
  const std::size_t nx = 20, nz = 80;
  const double h = 0.5, vs = 200.0, vp = 400.0;
  const StaggeredMaterial shallow(seisgn::testing::homogeneous_model(nx, nz, h, vs, vp));
  const StaggeredMaterial deep(seisgn::testing::homogeneous_model(nx, 2 * nz, h, vs, vp));
  const SourceWavelet w = SourceWavelet::centered(40.0);
  std::vector<SourceTerm> plane;
  for (std::size_t i = 0; i + 1 < nx; ++i) plane.push_back({i, 1.0});
  const ReceiverNode rec{nx / 2, nz - 6};
  const double depth = (static_cast<double>(rec.j) + 0.5) * h;
  // Incident wave plus its bottom echo, well before the surface multiple.
  const double duration = w.t0 + 1.5 / w.fc + (depth + 12.0 * h) / vp;
  const TimeAxis t = make_time_axis(duration, stable_dt(vp, shallow.geometry, 0.9));
  const auto test = simulate(shallow, plane, w, t, std::span(&rec, 1));
  const auto ref = simulate(deep, plane, w, t, std::span(&rec, 1));
  double incident = 0.0, reflected = 0.0;
  for (std::size_t k = 0; k < t.nt; ++k) {
    incident = std::max(incident, std::abs(ref[k]));
    reflected = std::max(reflected, std::abs(test[k] - ref[k]));
  }
  const double ratio = reflected / incident;
  const double tt = seconds_since(start);
  return {incident > 0.0 && ratio <= 0.15 && tt < 120.0,
          "reflected/incident peak = " + num(ratio) + " in " + num(tt) + " s"};
}

RunConfig replica() { return load_config(fs::path(SEISGN_SOURCE_DIR) / "configs" / "replica.cfg"); }

Outcome replica_inversion() {
  const auto start = Clock::now();
  const RunConfig c = replica();
  const fs::path out = scratch("replica");
  const InversionState state = cmd_invert(c, out);
  const double t = seconds_since(start);

  bool drops = true, monotone = true;
  std::ostringstream stages;
  for (std::size_t k = 0; k < state.history.size(); ++k) {
    const IterationRecord& r = state.history[k];
    const bool last = k + 1 == state.history.size() || state.history[k + 1].iteration == 1;
    if (r.iteration > 1 && r.misfit > state.history[k - 1].misfit) monotone = false;
    if (last) {
      const double orders = -std::log10(r.normalized_misfit);
      drops = drops && orders >= 0.8;
      stages << format_number(r.fc) << " Hz: " << num(orders) << " orders in " << r.iteration - 1 << " updates; ";
    }
  }
  // Void cells of the true model, compared on the FD grid.
  const ElasticModel truth = c.true_fd_model();
  const ElasticModel found = state.model.fd_model();
  double void_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < truth.vs.size(); ++k) {
    if (truth.vs.values()[k] == 0.0) void_min = std::min(void_min, found.vs.values()[k]);
  }
  const double background = c.true_model.layers.front().vs;
  const bool void_seen = void_min <= 0.7 * background;
  fs::remove_all(out);
  return {drops && void_seen && monotone,
          stages.str() + "min void Vs " + num(void_min) + " vs background " + num(background) +
              (monotone ? "; misfit non-increasing" : "; misfit rose in some iteration") + "; " + num(t) + " s"};
}

Outcome bench_ordering() {
  const auto start = Clock::now();
  const RunConfig c = replica();
  const fs::path out = scratch("bench");
  const BenchReport r = cmd_bench(c, out);
  const double t = seconds_since(start);
  fs::remove_all(out);
  const bool counts = r.coarsened.parameters == r.expected_coarse &&
                      r.regular.parameters == c.parameter_grid().coarse().size();
  return {counts && r.coarsened.total_seconds() < r.regular.total_seconds() && t < 1200.0,
          "M " + std::to_string(r.coarsened.parameters) + "/" + std::to_string(r.regular.parameters) +
              " (expected " + std::to_string(r.expected_coarse) + "), assembly+solve " +
              num(r.coarsened.total_seconds()) + " s vs " + num(r.regular.total_seconds()) + " s in " + num(t) + " s"};
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), dir).string(), read_text_file(e.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  const fs::path root = scratch("determinism");
  const fs::path cfg = root / "small.cfg";
  write_text_file(cfg, R"(length_m = 6
depth_m = 3
fd_step_m = 0.3
param_ratio = 2
layers = [(1.2, 200), (3.0, 700)]
voids = [(2.4, 0.6, 3.6, 1.2)]
sources = [0.0, 3.0, 5.7]
receivers = [0.45, 1.65, 2.85, 4.05, 5.25]
duration_s = 0.08
frequencies = [20, 30]
max_iterations = 2
zones = [(1.2, 1, 1), (1.8, 2, 3)]
)");
  const std::string cli = SEISGN_CLI_PATH;
  bool ok = true;
  std::string detail;
  for (const std::string cmd : {"make-model", "forward", "invert", "bench"}) {
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (cmd + "_" + std::to_string(rep));
      const std::string line = "\"" + cli + "\" " + cmd + " --config \"" + cfg.string() + "\" --out \"" +
                               out.string() + "\" > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) {
        ok = false;
        detail += cmd + " failed; ";
        break;
      }
      runs.push_back(snapshot(out));
    }
    if (runs.size() != 2) continue;
    if (cmd == "bench") {
      // Wall-clock fields differ by nature; everything else must match.
      auto strip = [](const std::string& json) {
        std::istringstream in(json);
        std::string line, kept;
        while (std::getline(in, line)) {
          if (line.find("seconds") == std::string::npos && line.find("time_ratio") == std::string::npos) {
            kept += line + "\n";
          }
        }
        return kept;
      };
      const bool same = runs[0].size() == 1 && runs[1].size() == 1 &&
                        strip(runs[0][0].second) == strip(runs[1][0].second);
      ok = ok && same;
      detail += std::string("bench ") + (same ? "identical apart from timings" : "DIFFERS") + "; ";
    } else {
      const bool same = !runs[0].empty() && runs[0] == runs[1];
      ok = ok && same;
      detail += cmd + " " + std::to_string(runs[0].size()) + " files " + (same ? "identical" : "DIFFER") + "; ";
    }
  }
  fs::remove_all(root);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"zone arithmetic (814 and 8300 coarse cells)", zone_arithmetic},
      {"streamed Hessian equals dense J^T J and A^T H A", hessian_streaming},
      {"J^T r matches finite-difference misfit gradient", gradient_check},
      {"time step bound keeps the leapfrog scheme bounded", stability},
      {"one-step stencil matches hand evaluation", micro_oracle},
      {"source/receiver reciprocity", reciprocity},
      {"absorbing boundary reflection below 15%", absorbing},
      {"scaled void inversion replica", replica_inversion},
      {"coarsened mode beats regular mode", bench_ordering},
      {"byte-identical reruns of every command", determinism},
  };
  std::set<std::size_t> selected;
  for (int a = 1; a < argc; ++a) selected.insert(static_cast<std::size_t>(std::atoi(argv[a])));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && !selected.count(k + 1)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << k + 1 << ": " << criteria[k].first << " -- "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
