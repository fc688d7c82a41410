// formsim: run, sweep and check multiplex formation-control scenarios.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "formsim/formsim.hpp"

#ifndef FORMSIM_SCENARIO_DIR
#define FORMSIM_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FORMSIM_OUT"); env != nullptr && *env != '\0') return env;
  return fs::current_path();
}

void print_warnings(const formsim::Scenario& sc) {
  for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplex formation-control simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_flag;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write its trajectory CSV and report");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_flag, "Output directory (default: $FORMSIM_OUT or the current directory)");

  std::vector<double> alphas;
  auto* sweep = app.add_subcommand("sweep", "Tail tracking error of each layer for a list of gains");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sweep->add_option("--alphas", alphas, "Comma-separated gains, e.g. 1,5,10")->required()->delimiter(',');

  std::string scenario_dir = FORMSIM_SCENARIO_DIR;
  auto* check = app.add_subcommand("check", "Run every bundled acceptance scenario");
  check->add_option("--scenarios", scenario_dir, "Directory of scenario files");

  auto* spectrum = app.add_subcommand("spectrum", "Print the Laplacian eigenvalues of a scenario's graph");
  spectrum->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return formsim::kExitError;
  }

  try {
    if (*run) {
      const auto sc = formsim::load_scenario_file(scenario_path);
      print_warnings(sc);
      const auto result = formsim::run_scenario(sc, output_dir(out_flag), fs::path(scenario_path).stem().string());
      std::cout << result.metric.name << " final=" << result.report.final_residual
                << " tolerance=" << result.report.tolerance
                << " converged=" << (result.report.converged ? "true" : "false") << '\n'
                << "trajectory: " << result.trajectory_path.string() << '\n'
                << "report: " << result.report_path.string() << '\n';
      return result.exit_code;
    }
    if (*sweep) {
      const auto sc = formsim::load_scenario_file(scenario_path);
      print_warnings(sc);
      std::cout << formsim::sweep_table(formsim::sweep_scenario(sc, alphas));
      return formsim::kExitConverged;
    }
    if (*check) return formsim::check_suite(scenario_dir, std::cout);
    if (*spectrum) {
      const auto sc = formsim::load_scenario_file(scenario_path);
      for (double v : formsim::laplacian_spectrum(sc.graph)) std::printf("%.17g\n", v);
      return formsim::kExitConverged;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return formsim::kExitError;
  }
  return formsim::kExitError;
}
