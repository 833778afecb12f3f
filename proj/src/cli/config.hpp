#pragma once

// Flat `key = value` experiment configuration.
//
//   # comment
//   geometry = sphere
//   n = 3
//   mus = 1e-1, 1e-2, 1e-3
//
// Keys are case-sensitive, values are decimal numbers, words, or comma lists.
// Every key a command does not consume is reported as an error, so typos do
// not silently fall back to defaults.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgmp/model.hpp"
#include "kgmp/mountainpass.hpp"

namespace kgmp::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  double number(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback) const;

  /// Throws ConfigError naming every key that no getter has touched.
  void reject_unused() const;

 private:
  const std::string* lookup(const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Command-line overrides shared by all subcommands.
struct RunOptions {
  std::string out_dir = ".";
  std::optional<int> grid_n;
  std::optional<double> grading;
  bool quiet = false;
};

// Typed views over a Config.  Physical constraints are checked here so that a
// bad file fails at load time with exit code 2.
Geometry geometry_from(const Config& config, int default_n = 3);
Params params_from(const Config& config, int n, double default_m0 = 1.0);
MPConfig mp_config_from(const Config& config);
int grid_intervals(const Config& config, const RunOptions& options, int fallback);
double grid_grading(const Config& config, const RunOptions& options, double fallback);

}  // namespace kgmp::cli
