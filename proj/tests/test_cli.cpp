#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"

using namespace kgmp;
using namespace kgmp::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path path = dir / "run.conf";
  std::ofstream(path) << text;
  return path;
}

int run_tool(const std::string& args) {
  const std::string command = std::string(KGMP_TOOL) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int run_in_process(const std::string& command, const fs::path& config, const fs::path& out) {
  RunOptions options;
  options.out_dir = out.string();
  options.quiet = true;
  std::ostringstream log, err;
  return run_command(command, config.string(), options, log, err);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto config = Config::parse("# comment\n geometry = sphere \nn=5\nmus = 1e-1, 1e-2 # trailing\nrefine = true\n");
  CHECK(config.text("geometry", "ball") == "sphere");
  CHECK(config.integer("n", 3) == 5);
  CHECK(config.numbers("mus", {}) == std::vector<double>{1e-1, 1e-2});
  CHECK(config.flag("refine", false));
  CHECK(config.number("missing", 7.5) == 7.5);
  CHECK_NOTHROW(config.reject_unused());

  CHECK_THROWS_AS(Config::parse("n = 3\nn = 5\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("n =\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("bad key = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("m0 = 1.0x\n").number("m0"), ConfigError);
  CHECK_THROWS_AS(Config::parse("n = 3.5\n").integer("n", 3), ConfigError);
  CHECK_THROWS_AS(Config::parse("").number("m0"), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/run.conf"), ConfigError);

  const auto unused = Config::parse("n = 3\ntypo = 1\n");
  unused.integer("n", 3);
  try {
    unused.reject_unused();
    FAIL("expected unused keys to be reported");
  } catch (const ConfigError& error) {
    CHECK(std::string(error.what()).find("typo") != std::string::npos);
  }
}

TEST_CASE("typed views") {
  const auto config = Config::parse("n = 5\nm0 = 1.5\nomega = 0.3\n");
  const auto geometry = geometry_from(config);
  CHECK(geometry.is_sphere());
  CHECK(geometry.n == 5);
  const auto params = params_from(config, geometry.n);
  CHECK(params.p == doctest::Approx(10.0 / 3.0));
  CHECK(params.m0 == 1.5);
  CHECK(params.omega == 0.3);
  CHECK_THROWS_AS(params_from(Config::parse("m0 = -1\n"), 3), ConfigError);
  CHECK_THROWS_AS(geometry_from(Config::parse("geometry = torus\n")), ConfigError);

  RunOptions options;
  const auto grid_config = Config::parse("grid_n = 300\n");
  CHECK(grid_intervals(grid_config, options, 100) == 300);
  options.grid_n = 50;
  CHECK(grid_intervals(grid_config, options, 100) == 50);
  CHECK_NOTHROW(grid_config.reject_unused());

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("exit codes of the kgmp binary") {
  const fs::path dir = scratch("exit_codes");
  const std::string out = " --quiet --out " + (dir / "out").string();

  CHECK(run_tool("solve --config " + write_config(dir, "n = 3\np = 4\nomega = 0.5\ngrid_n = 100\n").string() + out) ==
        0);
  CHECK(run_tool("solve --config " + write_config(dir, "n = 3\nfoo = 1\n").string() + out) == 2);
  CHECK(run_tool("solve --config " + (dir / "missing.conf").string() + out) == 2);
  CHECK(run_tool("solve --bogus-flag" + out) == 2);
  CHECK(run_tool("solve --config " +
                 write_config(dir, "n = 3\np = 4\nomega = 0.5\ngrid_n = 100\nendpoint_scale_max = 1.5\nseed_mu = 5\n")
                     .string() +
                 out) == 3);
  CHECK(run_tool("solve --config " + write_config(dir, "n = 3\np = 4\nm0 = 1\nomega = 1.2\n").string() + out) == 4);
}

TEST_CASE("command-level validation") {
  const fs::path dir = scratch("validation");
  CHECK(run_in_process("sweep", write_config(dir, "n = 3\np = 4\nomega = 0.5\n"), dir) == kExitConfig);
  CHECK(run_in_process("sweep", write_config(dir, "n = 3\np = 4\nomega_count = 0\n"), dir) == kExitConfig);
  CHECK(run_in_process("phase-ratio", write_config(dir, "mus = \n"), dir) == kExitConfig);
  CHECK(run_in_process("pohozaev", write_config(dir, "n = 3\n"), dir) == kExitConfig);
  CHECK(run_in_process("nonsense", write_config(dir, "n = 3\n"), dir) == kExitConfig);
  CHECK(run_in_process("solve", write_config(dir, "n = 3\np = 4\nomega = 0.5\ngrid_n = 100\ngrading = 0.5\n"), dir) ==
        kExitConfig);
}

TEST_CASE("phase-ratio drops duplicate scales") {
  const fs::path dir = scratch("phase_dedupe");
  RunOptions options;
  options.out_dir = dir.string();
  std::ostringstream log;
  const auto rows = run_phase_ratio(Config::parse("dims = 3\nmus = 1e-1, 1e-1, 1e-2\ngrid_n = 2000\n"), options, log);
  CHECK(rows.size() == 2);
  CHECK(log.str().find("duplicate") != std::string::npos);
  CHECK(fs::exists(dir / "phase_ratio.csv"));
}

TEST_CASE("sweep marks phases outside (-m0, m0) as refused") {
  const fs::path dir = scratch("sweep_refused");
  RunOptions options;
  options.out_dir = dir.string();
  options.quiet = true;
  std::ostringstream log;
  const auto summary =
      run_sweep(Config::parse("n = 3\np = 4\nomegas = 0, 0.5, 1.5\ngrid_n = 100\n"), options, log);
  REQUIRE(summary.rows.size() == 3);
  CHECK(summary.rows[0].status == "ok");
  CHECK(summary.rows[1].status == "ok");
  CHECK(summary.rows[2].status == "refused");
  CHECK(summary.ok_rows == 2);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.find("refused") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs") {
  const fs::path a = scratch("determinism_a"), b = scratch("determinism_b");
  const fs::path config = fs::path(KGMP_CONFIG_DIR) / "solve_s3.conf";
  REQUIRE(run_tool("solve --quiet --config " + config.string() + " --out " + a.string()) == 0);
  REQUIRE(run_tool("solve --quiet --config " + config.string() + " --out " + b.string()) == 0);
  for (const char* name : {"solve.json", "solve_profile.csv"}) {
    const std::string first = slurp(a / name);
    CHECK_FALSE(first.empty());
    CHECK(first == slurp(b / name));
  }
}
