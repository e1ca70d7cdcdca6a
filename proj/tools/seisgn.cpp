// Command-line front end: make-model, forward, invert, bench.
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seisgn/commands.hpp"
#include "seisgn/error.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"seisgn: elastic full-waveform inversion with zone coarsening"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
  };

  CLI::App* make_model = app.add_subcommand("make-model", "write the true and initial models");
  add_common(make_model);

  CLI::App* forward = app.add_subcommand("forward", "synthesize shot records");
  add_common(forward);
  std::string model_dir;
  std::string survey_path;
  double fc = 0.0;
  forward->add_option("--model", model_dir, "model directory (rho.csv, vs.csv, vp.csv)");
  forward->add_option("--survey", survey_path, "survey file overriding acquisition and timing");
  CLI::Option* fc_opt = forward->add_option("--fc", fc, "single center frequency in Hz");

  CLI::App* invert = app.add_subcommand("invert", "run the frequency-continuation inversion");
  add_common(invert);

  CLI::App* bench = app.add_subcommand("bench", "time regular vs coarsened Hessian assembly");
  add_common(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    seisgn::RunConfig config = seisgn::load_config(config_path);
    const fs::path out(out_dir);
    if (make_model->parsed()) {
      seisgn::cmd_make_model(config, out);
    } else if (forward->parsed()) {
      if (!survey_path.empty()) seisgn::apply_survey_file(config, survey_path);
      std::optional<fs::path> model;
      if (!model_dir.empty()) model = fs::path(model_dir);
      std::optional<double> single;
      if (fc_opt->count() > 0) single = fc;
      seisgn::cmd_forward(config, out, model, single);
    } else if (invert->parsed()) {
      const seisgn::InversionState state = seisgn::cmd_invert(config, out);
      const seisgn::IterationRecord& last = state.history.back();
      std::cout << "final normalized misfit " << last.normalized_misfit << " after "
                << state.history.size() << " logged iterations\n";
    } else if (bench->parsed()) {
      std::cout << seisgn::to_json(seisgn::cmd_bench(config, out));
    }
  } catch (const seisgn::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const seisgn::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
