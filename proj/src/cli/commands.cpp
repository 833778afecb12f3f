#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"

namespace kgmp::cli {

using json = nlohmann::ordered_json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    columns_ = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  CsvFile& operator<<(double value) { return cell(format_double(value)); }
  CsvFile& operator<<(int value) { return cell(std::to_string(value)); }
  CsvFile& operator<<(long value) { return cell(std::to_string(value)); }
  CsvFile& operator<<(bool value) { return cell(value ? "true" : "false"); }
  CsvFile& operator<<(const std::string& value) { return cell(value); }
  CsvFile& operator<<(const char* value) { return cell(value); }

 private:
  CsvFile& cell(const std::string& text) {
    out_ << (filled_ ? "," : "") << text;
    if (++filled_ == columns_) {
      out_ << '\n';
      filled_ = 0;
    }
    return *this;
  }

  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t filled_ = 0;
};

std::filesystem::path prepare(const RunOptions& options, const std::string& file) {
  std::filesystem::path dir(options.out_dir);
  std::filesystem::create_directories(dir);
  return dir / file;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json params_json(const Params& params) {
  return json{{"n", params.n}, {"p", params.p},   {"m0", params.m0},
              {"m1", params.m1}, {"q", params.q}, {"omega", params.omega}};
}

const char* geometry_name(const Geometry& geometry) { return geometry.is_sphere() ? "sphere" : "ball"; }

std::vector<std::string> param_columns() { return {"n", "p", "m0", "m1", "q", "omega"}; }

void put_params(CsvFile& csv, const Params& params) {
  csv << params.n << params.p << params.m0 << params.m1 << params.q << params.omega;
}

template <typename T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Field<double> seed_from(const Config& config, const RadialGrid<double>& grid) {
  const double mu = config.number("seed_mu", 0.2);
  if (!(mu > 0)) throw ConfigError("seed_mu must be positive");
  Field<double> seed = bubble(grid, BubbleSpec{mu, grid.geometry.n});
  if (grid.dirichlet_outer()) seed.array() -= seed[grid.size() - 1];
  return seed;
}

// Smooth radial test field: a few cosine modes with decaying random amplitudes.
Field<double> random_smooth_field(const RadialGrid<double>& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
  std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
  const double scale = std::exp(log_scale(rng));
  std::vector<double> modes(6);
  for (std::size_t k = 0; k < modes.size(); ++k) modes[k] = coefficient(rng) / double(k + 1);
  const double period = grid.geometry.r_max;
  return sample(grid, [&](double r) {
    double value = 0;
    for (std::size_t k = 0; k < modes.size(); ++k) value += modes[k] * std::cos(double(k) * M_PI * r / period);
    return scale * value;
  });
}

std::vector<double> sweep_omegas(const Config& config) {
  if (config.has("omega")) throw ConfigError("sweep: use 'omegas' or omega_min/omega_max/omega_count, not 'omega'");
  if (config.has("omegas")) {
    auto omegas = config.numbers("omegas", {});
    if (omegas.empty()) throw ConfigError("sweep: empty omega list");
    return omegas;
  }
  const double lo = config.number("omega_min", -0.9);
  const double hi = config.number("omega_max", 0.9);
  const int count = config.integer("omega_count", 13);
  if (count < 1 || hi < lo) throw ConfigError("sweep: empty omega range");
  std::vector<double> omegas;
  for (int i = 0; i < count; ++i) omegas.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return omegas;
}

}  // namespace

SolveOutcome run_solve(const Config& config, const RunOptions& options, std::ostream& log) {
  SolveOutcome out;
  out.geometry = geometry_from(config);
  out.params = params_from(config, out.geometry.n);
  out.grid_n = grid_intervals(config, options, 400);
  out.grading = grid_grading(config, options, 1.0);
  const MPConfig mp = mp_config_from(config);
  const auto grid = build_grid<double>(out.geometry, out.grid_n, out.grading);
  const Field<double> seed = seed_from(config, grid);
  config.reject_unused();

  out.report = mountain_pass(grid, out.params, seed, mp);
  out.min_v = out.report.v.minCoeff();
  out.max_v = out.report.v.maxCoeff();

  const auto& r = out.report;
  json doc{{"command", "solve"},
           {"geometry", geometry_name(out.geometry)},
           {"r_max", out.geometry.r_max},
           {"params", params_json(out.params)},
           {"grid_n", out.grid_n},
           {"grading", out.grading},
           {"path_points", mp.path_points},
           {"status", r.accepted() ? "ok" : "no_convergence"},
           {"level_c", r.level_c},
           {"path_level", r.path_level},
           {"grad_norm", r.grad_norm},
           {"residual1", r.residual1},
           {"residual2", r.residual2},
           {"newton_iters", r.newton_iters},
           {"min_u", r.min_u},
           {"max_u", r.max_u},
           {"min_v", out.min_v},
           {"max_v", out.max_v},
           {"path_iterations", r.path_iterations},
           {"path_converged", r.path_converged}};
  if (std::abs(out.params.p - out.params.critical_exponent()) < 1e-12)
    doc["mp_threshold"] = mp_threshold<double>(out.params.n);
  doc["level_history"] = r.level_history;
  doc["newton_history"] = r.newton_history;
  write_json(prepare(options, "solve.json"), doc);

  CsvFile csv(prepare(options, "solve_profile.csv"), {"r", "u", "v"});
  for (Eigen::Index i = 0; i < grid.size(); ++i) csv << grid.nodes[i] << r.u[i] << r.v[i];

  if (!options.quiet)
    log << "solve: level_c " << format_double(r.level_c) << ", residuals " << format_double(r.residual1)
        << " / " << format_double(r.residual2) << ", min u " << format_double(r.min_u) << '\n';
  return out;
}

SweepSummary run_sweep(const Config& config, const RunOptions& options, std::ostream& log) {
  const Geometry geometry = geometry_from(config);
  const std::vector<double> omegas = sweep_omegas(config);
  const Params base = params_from(config, geometry.n);
  const int grid_n = grid_intervals(config, options, 400);
  const double grading = grid_grading(config, options, 1.0);
  const MPConfig mp = mp_config_from(config);
  const auto grid = build_grid<double>(geometry, grid_n, grading);
  const Field<double> seed = seed_from(config, grid);
  config.reject_unused();

  // Rows are independent; they are computed in ω order so the output is deterministic.
  SweepSummary summary;
  for (double omega : omegas) {
    SweepRow row;
    row.params = base;
    row.params.omega = omega;
    row.grid_n = grid_n;
    row.grading = grading;
    try {
      row.report = mountain_pass(grid, row.params, seed, mp);
      row.status = "ok";
    } catch (const SolverError& error) {
      row.status = error.kind() == SolverFailure::Refused ? "refused" : "no_convergence";
      if (!options.quiet) log << "sweep: omega " << format_double(omega) << ": " << error.what() << '\n';
    }
    summary.rows.push_back(std::move(row));
  }

  std::vector<double> peaks;
  for (const auto& row : summary.rows)
    if (row.status == "ok") peaks.push_back(row.report.max_u);
  summary.ok_rows = int(peaks.size());
  if (!peaks.empty()) {
    summary.max_of_max_u = *std::max_element(peaks.begin(), peaks.end());
    std::vector<double> sorted = peaks;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    summary.median_max_u = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
    summary.bound_ratio = summary.max_of_max_u / summary.median_max_u;
  }

  CsvFile csv(prepare(options, "sweep.csv"),
              concat(param_columns(), {"geometry", "grid_n", "grading", "status", "level_c", "path_level",
                                       "max_u", "min_u", "residual1", "residual2", "newton_iters",
                                       "path_iterations"}));
  for (const auto& row : summary.rows) {
    put_params(csv, row.params);
    csv << geometry_name(geometry) << row.grid_n << row.grading << row.status;
    if (row.status == "ok") {
      const auto& r = row.report;
      csv << r.level_c << r.path_level << r.max_u << r.min_u << r.residual1 << r.residual2 << r.newton_iters
          << r.path_iterations;
    } else {
      for (int k = 0; k < 8; ++k) csv << "";
    }
  }

  json doc{{"command", "sweep"},
           {"geometry", geometry_name(geometry)},
           {"params", params_json(base)},
           {"grid_n", grid_n},
           {"grading", grading},
           {"rows", summary.rows.size()},
           {"ok_rows", summary.ok_rows},
           {"max_of_max_u", summary.max_of_max_u},
           {"median_max_u", summary.median_max_u},
           {"bound_ratio", summary.bound_ratio}};
  doc["params"].erase("omega");
  write_json(prepare(options, "sweep.json"), doc);

  if (!options.quiet)
    log << "sweep: " << summary.ok_rows << "/" << summary.rows.size() << " rows ok, max_u ratio "
        << format_double(summary.bound_ratio) << '\n';
  return summary;
}

std::vector<PhaseRow> run_phase_ratio(const Config& config, const RunOptions& options, std::ostream& log) {
  const std::vector<int> dims = config.integers("dims", {3, 5});
  std::vector<double> mus = config.numbers("mus", {1e-1, 1e-2, 1e-3});
  const int grid_n = grid_intervals(config, options, 20000);
  if (options.grading && !options.quiet)
    log << "phase-ratio: --grading ignored, the ratio grid is graded with exponent "
        << format_double(kPhaseGrading) << '\n';
  const double m1 = config.number("m1", 1.0);
  const double q = config.number("q", 1.0);
  config.reject_unused();

  if (dims.empty() || mus.empty()) throw ConfigError("phase-ratio: empty dimension or mu list");
  std::vector<double> unique;
  for (double mu : mus) {
    if (std::find(unique.begin(), unique.end(), mu) != unique.end()) {
      if (!options.quiet) log << "phase-ratio: duplicate mu " << format_double(mu) << " dropped\n";
      continue;
    }
    unique.push_back(mu);
  }

  std::vector<PhaseRow> rows;
  for (int n : dims) {
    Params params;
    params.n = n;
    params.p = params.critical_exponent();
    params.m1 = m1;
    params.q = q;
    try {
      params.validate();
    } catch (const DomainError& error) {
      throw ConfigError(error.what());
    }
    for (double mu : unique) {
      PhaseRow row;
      row.params = params;
      row.grid_n = grid_n;
      row.report = phase_ratio<double>(params, mu, grid_n);
      if (row.report.under_resolved && !options.quiet) log << "phase-ratio: " << row.report.warning << '\n';
      rows.push_back(std::move(row));
    }
  }

  CsvFile csv(prepare(options, "phase_ratio.csv"),
              {"n", "q", "m1", "mu", "grid_n", "grading", "ratio", "nodes_inside_mu", "under_resolved"});
  for (const auto& row : rows)
    csv << row.params.n << row.params.q << row.params.m1 << row.report.mu << row.grid_n << kPhaseGrading
        << row.report.ratio << long(row.report.nodes_inside_mu) << row.report.under_resolved;
  if (!options.quiet) log << "phase-ratio: " << rows.size() << " rows\n";
  return rows;
}

AubinScan run_aubin_scan(const Config& config, const RunOptions& options, std::ostream& log) {
  AubinScan scan;
  scan.geometry = geometry_from(config, 5);
  scan.lambda = config.number("lambda", 1.0);
  scan.rho0 = config.number("rho0", 1.0);
  const std::vector<double> epsilons = config.numbers("epsilons", {0.3, 0.1, 0.05, 0.02});
  scan.grid_n = grid_intervals(config, options, 4000);
  scan.grading = grid_grading(config, options, 2.0);
  config.reject_unused();
  if (epsilons.empty()) throw ConfigError("aubin-scan: empty epsilon list");

  const int n = scan.geometry.n;
  if (n < 3) throw ConfigError("aubin-scan: n must be >= 3");
  const auto grid = build_grid<double>(scan.geometry, scan.grid_n, scan.grading);
  const double k = sobolev_Kn<double>(n);
  scan.threshold = 1.0 / (k * k);
  for (double eps : epsilons) {
    AubinRow row;
    row.epsilon = eps;
    try {
      row.quotient = aubin_quotient(grid, scan.lambda, aubin_test_function(grid, eps, scan.rho0));
    } catch (const DomainError& error) {
      throw ConfigError(std::string("aubin-scan: ") + error.what());
    }
    row.below = row.quotient < scan.threshold;
    scan.found_below = scan.found_below || row.below;
    scan.rows.push_back(row);
  }
  if (!scan.found_below)
    scan.note = "no sub-threshold epsilon found in the scanned range";

  CsvFile csv(prepare(options, "aubin_scan.csv"),
              {"geometry", "n", "lambda", "rho0", "grid_n", "grading", "epsilon", "quotient", "threshold",
               "below_threshold"});
  for (const auto& row : scan.rows)
    csv << geometry_name(scan.geometry) << n << scan.lambda << scan.rho0 << scan.grid_n << scan.grading
        << row.epsilon << row.quotient << scan.threshold << row.below;

  json doc{{"command", "aubin-scan"},
           {"geometry", geometry_name(scan.geometry)},
           {"n", n},
           {"lambda", scan.lambda},
           {"rho0", scan.rho0},
           {"threshold", scan.threshold},
           {"found_below", scan.found_below},
           {"note", scan.note}};
  write_json(prepare(options, "aubin_scan.json"), doc);
  if (!options.quiet)
    log << "aubin-scan: " << (scan.found_below ? "sub-threshold quotient found" : scan.note) << '\n';
  return scan;
}

std::vector<PohozaevRow> run_pohozaev(const Config& config, const RunOptions& options, std::ostream& log) {
  const int n = config.integer("n", 5);
  if (config.text("geometry", "sphere") != "sphere") throw ConfigError("pohozaev: the family lives on a sphere");
  if (n < 5) throw ConfigError("pohozaev: n must be >= 5 (C_n is finite only then)");
  const std::vector<double> mus = config.numbers("mus", {3e-2, 1e-2});
  const double r0 = config.number("r0", 1.0);
  const bool refine = config.flag("refine", false);
  const Params params = params_from(config, n, std::sqrt(n * (n - 2) / 4.0));
  const int grid_n = grid_intervals(config, options, 4000);
  const double grading = grid_grading(config, options, 2.0);
  config.reject_unused();
  if (mus.empty()) throw ConfigError("pohozaev: empty mu list");

  const auto grid = build_grid<double>(Geometry::sphere(n), grid_n, grading);
  const double c_n = profile_l2_mass<double>(n);
  std::vector<PohozaevRow> rows;
  for (double mu_target : mus) {
    PohozaevRow row;
    row.params = params;
    row.grid_n = grid_n;
    row.grading = grading;
    try {
      row.beta = sphere_beta_for_scale(n, mu_target);
    } catch (const DomainError& error) {
      throw ConfigError(std::string("pohozaev: ") + error.what());
    }
    Field<double> u = sphere_solution(grid, row.beta);
    Field<double> v = solve_gauge(grid, params, u).v;
    if (refine) {
      const auto refined = newton_refine(grid, params, u, v);
      u = refined.u;
      v = refined.v;
      row.refined = true;
    }
    row.mu = concentration_scale(n, u[0]);
    row.report = pohozaev_terms(grid, params, u, v, r0);
    row.c_n = c_n;
    row.mass_ratio = row.report.lhs_mass / (-c_n * row.mu * row.mu);
    if (!row.report.note.empty() && !options.quiet) log << "pohozaev: " << row.report.note << '\n';
    rows.push_back(std::move(row));
  }

  CsvFile csv(prepare(options, "pohozaev.csv"),
              concat(param_columns(),
                     {"grid_n", "grading", "beta", "mu", "refined", "r0", "lhs_mass", "lhs_curv", "R_tilde",
                      "Q1", "Q2", "Q3", "subcritical_term", "lhs", "rhs", "balance_residual", "C_n",
                      "mass_ratio", "R_tilde_over_mu2"}));
  for (const auto& row : rows) {
    const auto& r = row.report;
    put_params(csv, row.params);
    csv << row.grid_n << row.grading << row.beta << row.mu << row.refined << r.r0 << r.lhs_mass << r.lhs_curv
        << r.R_tilde << r.Q1 << r.Q2 << r.Q3 << r.subcritical_term << r.lhs << r.rhs << r.balance_residual
        << row.c_n << row.mass_ratio << r.R_tilde / (row.mu * row.mu);
  }
  if (!options.quiet) log << "pohozaev: " << rows.size() << " rows\n";
  return rows;
}

GaugeCheckSummary run_gauge_check(const Config& config, const RunOptions& options, std::ostream& log) {
  const std::vector<int> dims = config.integers("dims", {3, 5, 7});
  const std::vector<double> qs = config.numbers("qs", {0.5, 1.0, 2.0});
  const double m1 = config.number("m1", 1.0);
  const int fields = config.integer("fields", 100);
  const int pairs = config.integer("pairs", 50);
  const long seed = long(config.number("random_seed", 20240601));
  const int grid_n = grid_intervals(config, options, 400);
  const double grading = grid_grading(config, options, 1.0);
  config.reject_unused();
  if (dims.empty() || qs.empty()) throw ConfigError("gauge-check: empty dimension or charge list");
  if (fields < 0 || pairs < 0) throw ConfigError("gauge-check: counts must be nonnegative");
  if (!(m1 > 0)) throw ConfigError("gauge-check: m1 must be positive");
  for (double q : qs)
    if (!(q > 0)) throw ConfigError("gauge-check: charges must be positive");
  for (int n : dims)
    if (n < 3) throw ConfigError("gauge-check: dimensions must be >= 3");

  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  GaugeCheckSummary summary;
  const std::size_t combos = dims.size() * qs.size();
  auto setup = [&](int index) {
    const int n = dims[std::size_t(index) % combos / qs.size()];
    Params params;
    params.n = n;
    params.p = params.critical_exponent();
    params.m1 = m1;
    params.q = qs[std::size_t(index) % qs.size()];
    return params;
  };

  for (int i = 0; i < fields; ++i) {
    const Params params = setup(i);
    const auto grid = build_grid<double>(Geometry::sphere(params.n), grid_n, grading);
    const auto gauge = solve_gauge(grid, params, random_smooth_field(grid, rng));
    GaugeCheckRow row;
    row.kind = "bounds";
    row.index = i;
    row.n = params.n;
    row.q = params.q;
    row.m1 = m1;
    row.min_v = gauge.min_v;
    row.max_v = gauge.max_v;
    row.bound_violation = gauge.bound_violation;
    row.ok = gauge.min_v >= -1e-10 && gauge.max_v <= 1.0 / params.q + 1e-10;
    summary.bounds_total++;
    summary.bounds_pass += row.ok;
    summary.rows.push_back(row);
  }
  for (int i = 0; i < pairs; ++i) {
    const Params params = setup(i);
    const auto grid = build_grid<double>(Geometry::sphere(params.n), grid_n, grading);
    const Field<double> u1 = random_smooth_field(grid, rng);
    const Field<double> u2 = random_smooth_field(grid, rng);
    const auto check = continuity_check(grid, params, u1, u2);
    GaugeCheckRow row;
    row.kind = "continuity";
    row.index = i;
    row.n = params.n;
    row.q = params.q;
    row.m1 = m1;
    row.lhs = check.lhs;
    row.rhs = check.rhs;
    row.ok = check.holds(1e-8);
    summary.continuity_total++;
    summary.continuity_pass += row.ok;
    summary.rows.push_back(row);
  }

  CsvFile csv(prepare(options, "gauge_check.csv"),
              {"kind", "index", "n", "q", "m1", "grid_n", "grading", "min_v", "max_v", "bound_violation", "lhs",
               "rhs", "ok"});
  for (const auto& row : summary.rows)
    csv << row.kind << row.index << row.n << row.q << row.m1 << grid_n << grading << row.min_v << row.max_v
        << row.bound_violation << row.lhs << row.rhs << row.ok;

  json doc{{"command", "gauge-check"},
           {"random_seed", seed},
           {"bounds_pass", summary.bounds_pass},
           {"bounds_total", summary.bounds_total},
           {"continuity_pass", summary.continuity_pass},
           {"continuity_total", summary.continuity_total}};
  write_json(prepare(options, "gauge_check.json"), doc);
  if (!options.quiet)
    log << "gauge-check: bounds " << summary.bounds_pass << "/" << summary.bounds_total << ", continuity "
        << summary.continuity_pass << "/" << summary.continuity_total << '\n';
  return summary;
}

int run_command(const std::string& command, const std::string& config_path, const RunOptions& options,
                std::ostream& log, std::ostream& err) {
  try {
    const Config config = config_path.empty() ? Config::parse("", "<defaults>") : Config::load(config_path);
    if (command == "solve") run_solve(config, options, log);
    else if (command == "sweep") run_sweep(config, options, log);
    else if (command == "phase-ratio") run_phase_ratio(config, options, log);
    else if (command == "aubin-scan") run_aubin_scan(config, options, log);
    else if (command == "pohozaev") run_pohozaev(config, options, log);
    else if (command == "gauge-check") run_gauge_check(config, options, log);
    else throw ConfigError("unknown command '" + command + "'");
    return kExitOk;
  } catch (const ConfigError& error) {
    err << "config error: " << error.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& error) {
    err << "config error: " << error.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& error) {
    err << error.what() << '\n';
    return error.kind() == SolverFailure::Refused ? kExitRefused : kExitSolver;
  }
}

}  // namespace kgmp::cli
