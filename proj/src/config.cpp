#include "scengen/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "scengen/errors.hpp"

namespace scengen {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double_value(std::string_view value, const std::string& key) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': not a number: '" +
                      std::string(value) + "'");
  }
  return out;
}

long long parse_int_value(std::string_view value, const std::string& key) {
  long long out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': not an integer: '" +
                      std::string(value) + "'");
  }
  return out;
}

bool parse_bool_value(std::string_view value, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

std::vector<double> parse_grid_value(std::string_view value,
                                     const std::string& key) {
  std::vector<double> grid;
  size_t start = 0;
  while (start <= value.size()) {
    const size_t comma = value.find(',', start);
    const auto piece = trim(value.substr(
        start, comma == std::string_view::npos ? comma : comma - start));
    if (piece.empty()) {
      throw ConfigError("config key '" + key + "': empty grid entry");
    }
    grid.push_back(parse_double_value(piece, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return grid;
}

// Shortest decimal form that parses back to the identical double.
std::string render_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void validate(const RunConfig& c) {
  if (c.window_n < 1) throw ConfigError("window_n must be at least 1");
  if (c.scenarios < 0) throw ConfigError("scenarios must be nonnegative");
  if (c.lambda_grid.empty()) throw ConfigError("lambda_grid must not be empty");
  for (double lam : c.lambda_grid) {
    if (!(lam >= 0.0)) throw ConfigError("lambda values must be nonnegative");
  }
  if (!(c.distance_base >= 0.0)) {
    throw ConfigError("distance_base must be nonnegative");
  }
  if (!(c.tail_fraction > 0.0) || c.tail_fraction >= 0.5) {
    throw ConfigError("tail_fraction must lie in (0, 0.5)");
  }
  if (c.bins < 1) throw ConfigError("bins must be at least 1");
  if (!(c.pca_threshold > 0.0) || c.pca_threshold > 1.0) {
    throw ConfigError("pca_threshold must lie in (0, 1]");
  }
  if (c.trim < 0.0 || c.trim >= 0.5) {
    throw ConfigError("trim must lie in [0, 0.5)");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key{trim(stripped.substr(0, eq))};
    const std::string value{trim(stripped.substr(eq + 1))};
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": missing key");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("config key '" + key + "' appears twice");
    }

    if (key == "load_actuals") c.load_actuals = value;
    else if (key == "load_forecasts") c.load_forecasts = value;
    else if (key == "wind_actuals") c.wind_actuals = value;
    else if (key == "wind_forecasts") c.wind_forecasts = value;
    else if (key == "solar_actuals") c.solar_actuals = value;
    else if (key == "solar_forecasts") c.solar_forecasts = value;
    else if (key == "catalog") c.catalog = value;
    else if (key == "model") c.model = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "target_day") c.target_day = value;
    else if (key == "window_n") c.window_n = int(parse_int_value(value, key));
    else if (key == "scenarios") c.scenarios = int(parse_int_value(value, key));
    else if (key == "seed") {
      const long long raw = parse_int_value(value, key);
      if (raw < 0) throw ConfigError("seed must be nonnegative");
      c.seed = std::uint64_t(raw);
    } else if (key == "lambda_grid") c.lambda_grid = parse_grid_value(value, key);
    else if (key == "distance_base") c.distance_base = parse_double_value(value, key);
    else if (key == "tail_fraction") c.tail_fraction = parse_double_value(value, key);
    else if (key == "bins") c.bins = int(parse_int_value(value, key));
    else if (key == "pca_threshold") c.pca_threshold = parse_double_value(value, key);
    else if (key == "trim") c.trim = parse_double_value(value, key);
    else if (key == "force_empirical") c.force_empirical = parse_bool_value(value, key);
    else if (key == "allow_in_sample") c.allow_in_sample = parse_bool_value(value, key);
    else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  auto put = [&](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  put("load_actuals", c.load_actuals);
  put("load_forecasts", c.load_forecasts);
  put("wind_actuals", c.wind_actuals);
  put("wind_forecasts", c.wind_forecasts);
  put("solar_actuals", c.solar_actuals);
  put("solar_forecasts", c.solar_forecasts);
  put("catalog", c.catalog);
  put("model", c.model);
  put("out_dir", c.out_dir);
  put("target_day", c.target_day);
  put("window_n", std::to_string(c.window_n));
  put("scenarios", std::to_string(c.scenarios));
  put("seed", std::to_string(c.seed));
  std::string grid;
  for (size_t i = 0; i < c.lambda_grid.size(); ++i) {
    if (i > 0) grid += ",";
    grid += render_double(c.lambda_grid[i]);
  }
  put("lambda_grid", grid);
  put("distance_base", render_double(c.distance_base));
  put("tail_fraction", render_double(c.tail_fraction));
  put("bins", std::to_string(c.bins));
  put("pca_threshold", render_double(c.pca_threshold));
  put("trim", render_double(c.trim));
  put("force_empirical", c.force_empirical ? "true" : "false");
  put("allow_in_sample", c.allow_in_sample ? "true" : "false");
  return out;
}

}  // namespace scengen
