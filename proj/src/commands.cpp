#include "seisgn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "seisgn/error.hpp"
#include "seisgn/io.hpp"

namespace seisgn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<ShotRecord> observed_for(const RunConfig& config, const Survey& survey,
                                     const std::optional<ElasticModel>& truth) {
  if (config.observed_dir) {
    return read_records(*config.observed_dir / frequency_dir(survey.wavelet.fc),
                        config.acquisition.sources.size());
  }
  return run_survey(*truth, survey);
}

void check_records(const std::vector<ShotRecord>& records, const Survey& survey) {
  for (const ShotRecord& r : records) {
    if (r.nr != survey.acquisition.receivers.size() || r.nt != survey.time.nt) {
      throw ValidationError("observed shot " + std::to_string(r.shot) +
                            " does not match the configured receivers/time axis");
    }
  }
}

// Zone arithmetic written out independently of build_zones.
std::size_t expected_coarse_count(const RunConfig& config) {
  const GridGeometry p = config.parameter_grid().coarse();
  if (config.zones.empty()) return p.size();
  std::size_t total = 0;
  for (const ZoneSpec& z : config.zones) {
    const auto rows = static_cast<std::size_t>(std::llround(z.depth_m / p.h3));
    total += std::max<std::size_t>(1, p.nx / z.ratio_x) * std::max<std::size_t>(1, rows / z.ratio_z);
  }
  return total;
}

BenchMode bench_mode(const std::string& name, const ParameterizedModel& model, const ZoneDecomposition& zones,
                     JacobianMode mode, const Survey& survey, std::span<const ShotRecord> observed,
                     std::span<const ShotRecord> baseline, const ResidualVector& residual,
                     const RunConfig& config) {
  BenchMode b;
  b.name = name;
  b.parameters = zones.coarse_count();
  const Eigen::SparseMatrix<double> laplacian = laplacian_matrix(zones);
  for (ParameterClass cls : {ParameterClass::Vs, ParameterClass::Vp}) {
    JacobianProblem problem;
    problem.model = &model;
    problem.zones = &zones;
    problem.survey = &survey;
    problem.baseline = baseline;
    problem.observed = observed;
    problem.rule = config.perturbation;
    problem.vp_cap = config.vp_cap;

    auto start = Clock::now();
    const NormalEquations ne = assemble_normal_equations(problem, cls, residual, mode);
    const Eigen::MatrixXd h = ne.hessian();
    b.assembly_seconds += seconds_since(start);

    const std::vector<double> means = restrict_mean(model.field(cls).values(), zones);
    const Eigen::VectorXd m =
        Eigen::Map<const Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    start = Clock::now();
    (void)gauss_newton_update(h, ne.gradient(), laplacian, config.regularization, m);
    b.solve_seconds += seconds_since(start);
  }
  b.peak_block_rows = residual.nt_conv;
  b.peak_block_cols = mode == JacobianMode::Restrict ? zones.fine_count() : zones.coarse_count();
  return b;
}

}  // namespace

void cmd_make_model(const RunConfig& config, const std::filesystem::path& out) {
  write_model(out, config.true_fd_model());
  write_model(out / "initial", config.initial_model().fd_model());
}

void cmd_forward(const RunConfig& config, const std::filesystem::path& out,
                 const std::optional<std::filesystem::path>& model_dir, std::optional<double> fc) {
  ElasticModel model;
  if (model_dir) {
    model = read_model(*model_dir);
    if (!(model.geometry == config.fd_grid())) {
      throw ValidationError("model in " + model_dir->string() + " does not match the configured FD grid");
    }
    if (model.vp.max() > config.vp_cap) throw ValidationError("model vp exceeds vp_cap");
  } else {
    model = config.true_fd_model();
  }
  std::vector<double> frequencies = config.schedule.frequencies;
  if (fc) {
    if (!(*fc > 0.0)) throw ValidationError("--fc must be > 0");
    frequencies = {*fc};
  }
  for (double f : frequencies) {
    write_records(out / frequency_dir(f), run_survey(model, config.survey(f)));
  }
}

InversionState cmd_invert(const RunConfig& config, const std::filesystem::path& out) {
  const InversionSettings settings = config.inversion_settings();
  std::optional<ElasticModel> truth;
  if (!config.observed_dir) truth = config.true_fd_model();

  std::vector<Survey> surveys;
  std::vector<std::vector<ShotRecord>> observed;
  for (double f : config.schedule.frequencies) {
    surveys.push_back(config.survey(f));
    observed.push_back(observed_for(config, surveys.back(), truth));
    check_records(observed.back(), surveys.back());
  }

  const ParameterizedModel initial = config.initial_model();
  write_model(out / "initial", initial.fd_model());
  auto on_iteration = [](const IterationRecord& r, const InversionState&) {
    std::cerr << "fc " << format_number(r.fc) << " iteration " << r.iteration
              << " normalized misfit " << format_number(r.normalized_misfit) << '\n';
  };
  auto on_stage = [&](const InversionState& s) {
    write_model(out / frequency_dir(config.schedule.frequencies[s.stage]), s.model.fd_model());
  };
  InversionState state = frequency_continuation(initial, observed, surveys, settings, on_iteration, on_stage);

  std::ostringstream log;
  write_log(log, state.history);
  write_text_file(out / "convergence.csv", log.str());
  write_model(out / "final", state.model.fd_model());
  return state;
}

BenchReport cmd_bench(const RunConfig& config, const std::filesystem::path& out) {
  const ParameterizedModel model = config.initial_model();
  const Survey survey = config.survey(config.schedule.frequencies.front());
  std::optional<ElasticModel> truth;
  if (!config.observed_dir) truth = config.true_fd_model();
  const std::vector<ShotRecord> observed = observed_for(config, survey, truth);
  check_records(observed, survey);
  const std::vector<ShotRecord> baseline = run_survey(model.fd_model(), survey);
  const ResidualVector residual =
      modified_residual(baseline, observed, survey.acquisition.reference_receiver);

  const GridGeometry p = config.parameter_grid().coarse();
  const ZoneDecomposition regular = ZoneDecomposition::identity(p.nx, p.nz);
  const ZoneDecomposition coarse = config.zone_decomposition();

  BenchReport report;
  report.expected_coarse = expected_coarse_count(config);
  if (coarse.coarse_count() != report.expected_coarse) {
    throw std::logic_error("zone decomposition disagrees with the zone arithmetic");
  }
  report.regular = bench_mode("regular", model, regular, JacobianMode::Direct, survey, observed, baseline,
                              residual, config);
  report.coarsened = bench_mode("coarsened", model, coarse, config.jacobian_mode, survey, observed,
                                baseline, residual, config);
  report.parameter_ratio =
      static_cast<double>(report.coarsened.parameters) / static_cast<double>(report.regular.parameters);
  report.time_ratio = report.coarsened.total_seconds() / report.regular.total_seconds();
  write_text_file(out / "bench.json", to_json(report));
  return report;
}

std::string to_json(const BenchReport& report) {
  auto mode = [](const BenchMode& b) {
    return nlohmann::ordered_json{{"parameters", b.parameters},
                                  {"assembly_seconds", b.assembly_seconds},
                                  {"solve_seconds", b.solve_seconds},
                                  {"total_seconds", b.total_seconds()},
                                  {"peak_block_rows", b.peak_block_rows},
                                  {"peak_block_cols", b.peak_block_cols}};
  };
  nlohmann::ordered_json j{{"format", "seisgn-v1"},
                           {"regular", mode(report.regular)},
                           {"coarsened", mode(report.coarsened)},
                           {"expected_coarse_parameters", report.expected_coarse},
                           {"parameter_ratio", report.parameter_ratio},
                           {"time_ratio", report.time_ratio}};
  return j.dump(2) + "\n";
}

}  // namespace seisgn
