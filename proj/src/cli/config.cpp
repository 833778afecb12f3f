#include "config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kgmp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError("key '" + key + "': empty value");
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(value))
    throw ConfigError("key '" + key + "': '" + s + "' is not a finite decimal number");
  return value;
}

int to_integer(const std::string& key, const std::string& raw) {
  const double value = to_number(key, raw);
  if (value != std::floor(value) || std::abs(value) > 1e9)
    throw ConfigError("key '" + key + "': '" + trim(raw) + "' is not an integer");
  return int(value);
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  std::stringstream stream(raw);
  std::string item;
  while (std::getline(stream, item, ',')) items.push_back(trim(item));
  return items;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config config;
  config.origin_ = origin;
  std::stringstream stream(text);
  std::string line;
  int number = 0;
  while (std::getline(stream, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    for (char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
        throw ConfigError(where + ": invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
    if (config.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    config.values_[key] = value;
  }
  return config;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

const std::string* Config::lookup(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto* raw = lookup(key);
  return raw ? *raw : fallback;
}

double Config::number(const std::string& key, double fallback) const {
  const auto* raw = lookup(key);
  return raw ? to_number(key, *raw) : fallback;
}

double Config::number(const std::string& key) const {
  const auto* raw = lookup(key);
  if (!raw) throw ConfigError("missing required key '" + key + "'");
  return to_number(key, *raw);
}

int Config::integer(const std::string& key, int fallback) const {
  const auto* raw = lookup(key);
  return raw ? to_integer(key, *raw) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto* raw = lookup(key);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + *raw + "'");
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const auto* raw = lookup(key);
  if (!raw) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*raw)) out.push_back(to_number(key, item));
  return out;
}

std::vector<int> Config::integers(const std::string& key, const std::vector<int>& fallback) const {
  const auto* raw = lookup(key);
  if (!raw) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(*raw)) out.push_back(to_integer(key, item));
  return out;
}

void Config::reject_unused() const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError(origin_ + ": unknown key(s): " + unknown);
}

Geometry geometry_from(const Config& config, int default_n) {
  const std::string kind = config.text("geometry", "sphere");
  const int n = config.integer("n", default_n);
  try {
    if (kind == "sphere") return Geometry::sphere(n);
    if (kind == "ball") return Geometry::ball(n, config.number("radius", 1.0));
  } catch (const DomainError& error) {
    throw ConfigError(error.what());
  }
  throw ConfigError("key 'geometry': expected 'sphere' or 'ball', got '" + kind + "'");
}

Params params_from(const Config& config, int n, double default_m0) {
  Params params;
  params.n = n;
  params.p = 2.0 * n / (n - 2.0);
  const std::string p = config.text("p", "critical");
  if (p != "critical") params.p = config.number("p");
  params.m0 = config.number("m0", default_m0);
  params.m1 = config.number("m1", 1.0);
  params.q = config.number("q", 1.0);
  params.omega = config.number("omega", 0.0);
  try {
    params.validate();
  } catch (const DomainError& error) {
    throw ConfigError(error.what());
  }
  return params;
}

MPConfig mp_config_from(const Config& config) {
  MPConfig mp;
  mp.path_points = config.integer("path_points", mp.path_points);
  mp.max_outer_iters = config.integer("max_outer_iters", mp.max_outer_iters);
  mp.descent_step = config.number("descent_step", mp.descent_step);
  mp.grad_tol = config.number("grad_tol", mp.grad_tol);
  mp.endpoint_scale_max = config.number("endpoint_scale_max", mp.endpoint_scale_max);
  try {
    mp.validate();
  } catch (const DomainError& error) {
    throw ConfigError(error.what());
  }
  return mp;
}

int grid_intervals(const Config& config, const RunOptions& options, int fallback) {
  const int from_file = config.integer("grid_n", fallback);
  const int n = options.grid_n ? *options.grid_n : from_file;
  if (n < 8) throw ConfigError("grid_n must be >= 8");
  return n;
}

double grid_grading(const Config& config, const RunOptions& options, double fallback) {
  const double from_file = config.number("grading", fallback);
  const double g = options.grading ? *options.grading : from_file;
  if (!(g >= 1.0)) throw ConfigError("grading must be >= 1");
  return g;
}

}  // namespace kgmp::cli
