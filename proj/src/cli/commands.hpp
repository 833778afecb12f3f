#pragma once

// Experiment drivers behind the `kgmp` subcommands.  Each reads its keys from
// a Config, writes CSV/JSON files into options.out_dir and returns the rows it
// wrote so callers (tests, the acceptance suite) can inspect them directly.

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "kgmp/kgmp.hpp"

namespace kgmp::cli {

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitRefused = 4 };

/// "%.17g", the float format of every CSV cell.
std::string format_double(double value);

struct SolveOutcome {
  Params params;
  Geometry geometry;
  int grid_n = 0;
  double grading = 1;
  SolveReport<double> report;
  double max_v = 0;
  double min_v = 0;
};

struct SweepRow {
  Params params;
  int grid_n = 0;
  double grading = 1;
  std::string status;  // ok | no_convergence | refused
  SolveReport<double> report;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  int ok_rows = 0;
  double max_of_max_u = 0;
  double median_max_u = 0;
  double bound_ratio = 0;  // max_of_max_u / median_max_u over ok rows
};

struct PhaseRow {
  Params params;
  int grid_n = 0;
  PhaseRatioReport<double> report;
};

struct AubinRow {
  double epsilon = 0;
  double quotient = 0;
  bool below = false;
};

struct AubinScan {
  Geometry geometry;
  int grid_n = 0;
  double grading = 1;
  double lambda = 0;
  double rho0 = 0;
  double threshold = 0;  // 1/K_n²
  std::vector<AubinRow> rows;
  bool found_below = false;
  std::string note;
};

struct PohozaevRow {
  Params params;
  int grid_n = 0;
  double grading = 1;
  double beta = 0;
  double mu = 0;
  bool refined = false;
  PohozaevReport<double> report;
  double c_n = 0;
  double mass_ratio = 0;  // lhs_mass / (-C_n μ²)
};

struct GaugeCheckRow {
  std::string kind;  // bounds | continuity
  int index = 0;
  int n = 0;
  double q = 0;
  double m1 = 0;
  double min_v = 0;
  double max_v = 0;
  double bound_violation = 0;
  double lhs = 0;
  double rhs = 0;
  bool ok = false;
};

struct GaugeCheckSummary {
  std::vector<GaugeCheckRow> rows;
  int bounds_total = 0, bounds_pass = 0;
  int continuity_total = 0, continuity_pass = 0;
};

SolveOutcome run_solve(const Config& config, const RunOptions& options, std::ostream& log);
SweepSummary run_sweep(const Config& config, const RunOptions& options, std::ostream& log);
std::vector<PhaseRow> run_phase_ratio(const Config& config, const RunOptions& options, std::ostream& log);
AubinScan run_aubin_scan(const Config& config, const RunOptions& options, std::ostream& log);
std::vector<PohozaevRow> run_pohozaev(const Config& config, const RunOptions& options, std::ostream& log);
GaugeCheckSummary run_gauge_check(const Config& config, const RunOptions& options, std::ostream& log);

/// Dispatches by subcommand name and maps exceptions to exit codes; messages go to `err`.
int run_command(const std::string& command, const std::string& config_path, const RunOptions& options,
                std::ostream& log, std::ostream& err);

}  // namespace kgmp::cli
