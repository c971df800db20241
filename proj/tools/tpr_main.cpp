#include "tpr/bargmann.hpp"
#include "tpr/errors.hpp"
#include "tpr/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"two-photon Rabi/Dicke model laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  run->add_option("config", config_path, "path to the config file")->required();

  std::string file_a, file_b, metric = "rms";
  double tol = 0.0;
  bool force = false, interp = false;
  auto* cmp = app.add_subcommand("compare", "compare two trace CSV files");
  cmp->add_option("a", file_a)->required();
  cmp->add_option("b", file_b)->required();
  cmp->add_option("--tol", tol, "pass threshold")->required();
  cmp->add_option("--metric", metric, "rms or max");
  cmp->add_flag("--force", force, "ignore params_hash mismatch");
  cmp->add_flag("--interp", interp, "interpolate the second trace onto the first grid");

  double g = 0.0, omega = 1.0;
  auto* cls = app.add_subcommand("classify", "spectral classification from the coupling ratio");
  cls->add_option("--g", g, "coupling strength")->required();
  cls->add_option("--omega", omega, "mode frequency");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return tpr::run_experiment_file(config_path, std::cout, std::cerr);

  if (cmp->parsed()) {
    try {
      tpr::CompareOptions opts;
      opts.metric = metric;
      opts.tol = tol;
      opts.force = force;
      opts.interpolate = interp;
      const tpr::CompareOutcome out =
          tpr::compare_traces(tpr::read_csv_file(file_a), tpr::read_csv_file(file_b), opts);
      std::cout << out.message << "\n";
      return out.pass ? 0 : 1;
    } catch (const tpr::ConfigError& e) {
      std::cerr << "compare error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  if (cls->parsed()) {
    try {
      const tpr::ModelClass mc = tpr::classify_model(g, omega);
      std::cout << to_string(mc.classification) << " (omega_bar=" << mc.omega_bar
                << ", margin=" << mc.margin << ")\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}
