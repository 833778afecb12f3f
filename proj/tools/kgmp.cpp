// kgmp: experiment driver for the electrostatic Klein-Gordon-Maxwell-Proca solvers.
//
//   kgmp solve --config configs/solve_s3.conf --out results/solve_s3
//
// Exit codes: 0 success, 2 config error, 3 solver failure, 4 refusal.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the electrostatic Klein-Gordon-Maxwell-Proca system"};
  app.require_subcommand(1);

  std::string config_path;
  kgmp::cli::RunOptions options;
  std::optional<int> grid_n;
  std::optional<double> grading;

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "mountain-pass search plus Newton refinement; writes solve.json and solve_profile.csv"},
      {"sweep", "omega sweep of solves; writes sweep.csv and sweep.json"},
      {"phase-ratio", "phase-compensation ratio over dimensions and bubble scales; writes phase_ratio.csv"},
      {"aubin-scan", "Aubin quotient of truncated bubbles; writes aubin_scan.csv and aubin_scan.json"},
      {"pohozaev", "Pohozaev terms over the exact sphere family; writes pohozaev.csv"},
      {"gauge-check", "gauge bounds and continuity on random fields; writes gauge_check.csv/json"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value configuration file (defaults when omitted)");
    sub->add_option("--out", options.out_dir, "output directory")->capture_default_str();
    sub->add_option("--grid-n", grid_n, "override the number of grid intervals");
    sub->add_option("--grading", grading, "override the grading exponent (>= 1)");
    sub->add_flag("--quiet", options.quiet, "suppress progress messages");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : kgmp::cli::kExitConfig;
  }
  options.grid_n = grid_n;
  options.grading = grading;
  const std::string command = app.get_subcommands().front()->get_name();
  return kgmp::cli::run_command(command, config_path, options, std::cout, std::cerr);
}
