#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scengen {

// One flat key = value document drives a whole run, so a config file plus a
// seed reproduces any result. serialize_config(parse_config(text)) is the
// canonical form; parse_config(serialize_config(c)) == c exactly.
struct RunConfig {
  std::string load_actuals;
  std::string load_forecasts;
  std::string wind_actuals;
  std::string wind_forecasts;
  std::string solar_actuals;
  std::string solar_forecasts;
  std::string catalog;
  std::string model;  // bundle path written by fit, read by simulate
  std::string out_dir = "out";

  std::string target_day;  // "YYYY-MM-DD"
  int window_n = 50;       // analog-window half width in days
  int scenarios = 1000;
  std::uint64_t seed = 0;

  std::vector<double> lambda_grid{0.01, 0.05, 0.1, 0.2};
  double distance_base = 0.0;  // > 0 pins the wind spatial penalty base
  double tail_fraction = 0.15;
  int bins = 10;
  double pca_threshold = 0.95;
  double trim = 0.01;

  bool force_empirical = false;  // fitted-normal load marginals (tail ablation)
  bool allow_in_sample = false;

  bool operator==(const RunConfig&) const = default;
};

// Parses `key = value` lines ('#' comments, blank lines ignored). Unknown
// keys, duplicate keys, malformed values, or out-of-range numbers throw
// ConfigError.
RunConfig parse_config(const std::string& text);

// Reads and parses a config file. Throws ConfigError when unreadable.
RunConfig read_config(const std::string& path);

// Canonical rendering: every key once, in declaration order, doubles in
// shortest round-trip form.
std::string serialize_config(const RunConfig& config);

}  // namespace scengen
