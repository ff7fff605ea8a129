// scengen command line: fit, simulate, graph-export, fixture-gen.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 convergence
// failure, 5 sampler failure (non-PSD covariance or unsatisfiable constraint).

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scengen/config.hpp"
#include "scengen/csv.hpp"
#include "scengen/engine.hpp"
#include "scengen/errors.hpp"
#include "scengen/fixture.hpp"
#include "scengen/ingest.hpp"
#include "scengen/serialize.hpp"

namespace fs = std::filesystem;
using namespace scengen;

namespace {

// Precedence: --out flag, then SCENGEN_OUT, then the config value. The
// environment variable is the only environment-based setting.
std::string resolve_out(const std::string& flag, const std::string& config_value) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SCENGEN_OUT"); env && *env) return env;
  return config_value;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw DataError("write failed for " + path.string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// --- fit ------------------------------------------------------------------

struct InputPanels {
  AssetCatalog catalog;
  PanelBuildResult load, wind, solar;
};

InputPanels read_inputs(const RunConfig& cfg) {
  require(!cfg.catalog.empty(), "fit needs catalog =");
  require(!cfg.load_actuals.empty() && !cfg.load_forecasts.empty(),
          "fit needs load_actuals = and load_forecasts =");
  require(!cfg.wind_actuals.empty() && !cfg.wind_forecasts.empty(),
          "fit needs wind_actuals = and wind_forecasts =");
  require(!cfg.solar_actuals.empty() && !cfg.solar_forecasts.empty(),
          "fit needs solar_actuals = and solar_forecasts =");

  InputPanels in;
  in.catalog = read_catalog_csv(cfg.catalog);

  std::map<std::string, double> capacity;
  for (const auto& a : in.catalog.assets) capacity[a.asset_id] = a.capacity_mw;

  auto build = [&](const std::string& act_path, const std::string& fc_path,
                   const std::vector<std::string>& units, bool check_capacity) {
    auto actuals = resample_hourly(read_series_csv(act_path));
    auto forecasts = resample_hourly(read_series_csv(fc_path));
    if (check_capacity) validate_capacity(actuals, capacity);
    return compute_deviations(actuals, forecasts, units);
  };

  std::vector<std::string> wind_units, solar_units;
  for (const auto& a : in.catalog.assets)
    (a.quantity == "wind" ? wind_units : solar_units).push_back(a.asset_id);

  in.load = build(cfg.load_actuals, cfg.load_forecasts, in.catalog.zones, false);
  in.wind = build(cfg.wind_actuals, cfg.wind_forecasts, wind_units, true);
  in.solar = build(cfg.solar_actuals, cfg.solar_forecasts, solar_units, true);
  return in;
}

EngineConfig engine_config(const RunConfig& cfg) {
  EngineConfig ecfg;
  ecfg.lambda_grid = cfg.lambda_grid;
  ecfg.wind_distance_base = cfg.distance_base;
  ecfg.tail_fraction = cfg.tail_fraction;
  ecfg.bins = cfg.bins;
  ecfg.pca_threshold = cfg.pca_threshold;
  ecfg.load_marginal = cfg.force_empirical ? "normal" : "gpd";
  return ecfg;
}

std::string day_list(const std::vector<Date>& days) {
  std::string out;
  for (const auto& d : days) {
    if (!out.empty()) out += ", ";
    out += d.to_string();
  }
  return out;
}

std::string fit_report(const FittedSystem& sys, const InputPanels& in) {
  std::string r;
  r += "target_day: " + sys.window.target_day.to_string() + "\n";
  r += "window_days: " + std::to_string(sys.window.history_days.size()) + "\n";
  r += "window_first: " + sys.window.history_days.front().to_string() + "\n";
  r += "window_last: " + sys.window.history_days.back().to_string() + "\n";
  r += std::string("window_in_sample: ") + (sys.window.in_sample ? "true" : "false") + "\n";
  auto dropped = [](const char* name, const std::vector<Date>& days) {
    std::string line = std::string("dropped_days_") + name + ": " +
                       std::to_string(days.size());
    if (!days.empty()) line += " (" + day_list(days) + ")";
    return line + "\n";
  };
  r += dropped("load", in.load.dropped_days);
  r += dropped("wind", in.wind.dropped_days);
  r += dropped("solar", in.solar.dropped_days);
  r += "sunrise_lag: " + std::to_string(sys.sunrise_lag) + "\n";
  r += "sunset_lag: " + std::to_string(sys.sunset_lag) + "\n";
  r += "solar_components: " + std::to_string(sys.solar_model.k) + "\n";
  r += std::string("wind_independent: ") + (sys.wind_independent ? "true" : "false") + "\n";
  r += "penalty_load_spatial: " + fmt_double(sys.penalties.load_spatial) + "\n";
  r += "penalty_load_temporal: " + fmt_double(sys.penalties.load_temporal) + "\n";
  r += "penalty_wind_spatial: " + fmt_double(sys.penalties.wind_spatial) + "\n";
  r += "penalty_wind_temporal: " + fmt_double(sys.penalties.wind_temporal) + "\n";
  r += "penalty_solar_spatial: " + fmt_double(sys.penalties.solar_spatial) + "\n";
  r += "penalty_solar_component: " + fmt_double(sys.penalties.solar_component) + "\n";
  r += "penalty_joint: " + fmt_double(sys.penalties.joint) + "\n";
  r += "warnings: " + std::to_string(sys.warnings.size()) + "\n";
  for (const auto& w : sys.warnings) r += "warning: " + w + "\n";
  return r;
}

void export_graph(const fs::path& dir, const std::string& name,
                  const PrecisionEstimate& estimate,
                  const std::vector<std::string>& labels) {
  auto g = dependency_graph(estimate, labels);
  write_file(dir / (name + ".csv"), g.to_edge_csv());
  write_file(dir / (name + ".dot"), g.to_dot());
}

void export_all_graphs(const FittedSystem& sys, const fs::path& dir) {
  export_graph(dir, "joint_graph", sys.joint, sys.joint_labels);
  export_graph(dir, "load_spatial", sys.load_model.spatial, sys.load_model.unit_order);
  export_graph(dir, "load_temporal", sys.load_model.temporal, sys.load_model.lag_order);
  export_graph(dir, "wind_spatial", sys.wind_model.spatial, sys.wind_model.unit_order);
  export_graph(dir, "wind_temporal", sys.wind_model.temporal, sys.wind_model.lag_order);
  const auto& solar = sys.solar_model.separable;
  export_graph(dir, "solar_spatial", solar.spatial, solar.unit_order);
  export_graph(dir, "solar_component", solar.temporal, solar.lag_order);
}

int cmd_fit(const RunConfig& cfg, const std::string& out_dir) {
  require(!cfg.target_day.empty(), "fit needs target_day =");
  Date target = Date::parse(cfg.target_day);

  InputPanels in = read_inputs(cfg);

  std::set<Date> available(in.load.panel.days.begin(), in.load.panel.days.end());
  auto keep_common = [&](const std::vector<Date>& days) {
    std::set<Date> other(days.begin(), days.end());
    std::set<Date> merged;
    for (const auto& d : available)
      if (other.count(d)) merged.insert(d);
    available = std::move(merged);
  };
  keep_common(in.wind.panel.days);
  keep_common(in.solar.panel.days);

  DayWindow window = select_history(target, available, cfg.window_n);
  if (window.in_sample && !cfg.allow_in_sample)
    throw ConfigError("history for " + cfg.target_day +
                      " requires the in-sample fallback; set allow_in_sample = true");

  FittedSystem sys = fit_system(in.load.panel, in.wind.panel, in.solar.panel,
                                in.catalog, window, engine_config(cfg));

  fs::path dir = prepare_out_dir(out_dir);
  std::string model_path = cfg.model.empty() ? (dir / "model.json").string() : cfg.model;
  write_file(model_path, save_system(sys));
  export_graph(dir, "joint_graph", sys.joint, sys.joint_labels);
  write_file(dir / "fit_report.txt", fit_report(sys, in));

  for (const auto& w : sys.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "model: " << model_path << "\n"
            << "window_days: " << sys.window.history_days.size() << "\n"
            << "wind_independent: " << (sys.wind_independent ? "true" : "false")
            << "\n";
  return 0;
}

// --- simulate ---------------------------------------------------------------

const std::string kScenarioHeader = [] {
  std::string h = "scenario_id,quantity,unit_id,target_day";
  for (int l = 0; l < kLagsPerDay; ++l) {
    char buf[8];
    std::snprintf(buf, sizeof buf, ",h%02d", l);
    h += buf;
  }
  return h + "\n";
}();

std::string scenario_csv(const ScenarioSet& set) {
  std::string out = kScenarioHeader;
  std::string day = set.target_day.to_string();
  for (size_t s = 0; s < set.scenarios.size(); ++s) {
    const auto& cube = set.scenarios[s];
    for (size_t u = 0; u < set.unit_ids.size(); ++u) {
      out += std::to_string(s) + "," + set.quantity + "," + set.unit_ids[u] + "," + day;
      for (int l = 0; l < kLagsPerDay; ++l)
        out += "," + format_mw(cube(int(u), l));
      out += "\n";
    }
  }
  return out;
}

void append_band_rows(std::string& out, const ScenarioSet& set,
                      const BandStatistics& stats, const Eigen::MatrixXd* actuals) {
  std::string day = set.target_day.to_string();
  auto row = [&](const char* kind, const Eigen::MatrixXd& m, int u) {
    out += std::string(kind) + "," + set.quantity + "," + set.unit_ids[size_t(u)] +
           "," + day;
    for (int l = 0; l < kLagsPerDay; ++l) out += "," + format_mw(m(u, l));
    out += "\n";
  };
  for (int u = 0; u < int(set.unit_ids.size()); ++u) {
    row("lower", stats.lower, u);
    row("upper", stats.upper, u);
    row("forecast", set.forecasts, u);
    if (actuals) row("actual", *actuals, u);
  }
}

// Day slice of a series CSV as a units x 24 matrix. strict=true throws on any
// missing cell; strict=false returns nullopt instead (used for actuals, which
// legitimately may not exist yet for the target day).
std::optional<Eigen::MatrixXd> day_matrix(const std::string& path,
                                          const std::vector<std::string>& units,
                                          const Date& day, bool strict,
                                          const std::string& what) {
  auto records = resample_hourly(read_series_csv(path));
  std::map<std::string, int> index;
  for (size_t u = 0; u < units.size(); ++u) index[units[u]] = int(u);
  Eigen::MatrixXd m(int(units.size()), kLagsPerDay);
  Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(int(units.size()), kLagsPerDay);
  for (const auto& r : records) {
    if (r.when.date != day || r.when.minute() != 0) continue;
    auto it = index.find(r.unit_id);
    if (it == index.end()) continue;
    m(it->second, r.when.hour()) = r.value;
    seen(it->second, r.when.hour()) = 1.0;
  }
  if (seen.minCoeff() < 1.0) {
    if (strict)
      throw DataError(what + " is missing values for " + day.to_string());
    return std::nullopt;
  }
  return m;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir,
                 std::uint64_t seed) {
  require(!cfg.target_day.empty(), "simulate needs target_day =");
  require(!cfg.load_forecasts.empty() && !cfg.wind_forecasts.empty() &&
              !cfg.solar_forecasts.empty(),
          "simulate needs the three forecast CSV paths");
  Date target = Date::parse(cfg.target_day);

  std::string model_path =
      cfg.model.empty() ? (fs::path(out_dir) / "model.json").string() : cfg.model;
  FittedSystem sys = load_system(read_file(model_path));
  std::string hash = model_hash(sys);

  DayForecasts fc;
  fc.load = *day_matrix(cfg.load_forecasts, sys.catalog.zones, target, true,
                        "load forecast");
  fc.wind = *day_matrix(cfg.wind_forecasts, sys.wind_units, target, true,
                        "wind forecast");
  fc.solar = *day_matrix(cfg.solar_forecasts, sys.solar_units, target, true,
                         "solar forecast");

  ScenarioBundle bundle = generate_scenarios(sys, target, fc, cfg.scenarios, seed);
  bundle.load.model_hash = bundle.wind.model_hash = bundle.solar.model_hash = hash;

  fs::path dir = prepare_out_dir(out_dir);
  write_file(dir / "scenarios_load.csv", scenario_csv(bundle.load));
  write_file(dir / "scenarios_wind.csv", scenario_csv(bundle.wind));
  write_file(dir / "scenarios_solar.csv", scenario_csv(bundle.solar));

  std::string bands = kScenarioHeader;
  if (cfg.scenarios > 0) {
    auto actuals_for = [&](const std::string& path,
                           const std::vector<std::string>& units)
        -> std::optional<Eigen::MatrixXd> {
      if (path.empty()) return std::nullopt;
      return day_matrix(path, units, target, false, "actuals");
    };
    auto load_act = actuals_for(cfg.load_actuals, sys.catalog.zones);
    auto wind_act = actuals_for(cfg.wind_actuals, sys.wind_units);
    auto solar_act = actuals_for(cfg.solar_actuals, sys.solar_units);
    auto emit = [&](const ScenarioSet& set, const std::optional<Eigen::MatrixXd>& act) {
      BandStatistics stats = band_statistics(set, cfg.trim, act ? &*act : nullptr);
      append_band_rows(bands, set, stats, act ? &*act : nullptr);
    };
    emit(bundle.load, load_act);
    emit(bundle.wind, wind_act);
    emit(bundle.solar, solar_act);
  }
  write_file(dir / "bands.csv", bands);

  std::cout << "scenarios: " << cfg.scenarios << "\n"
            << "model_hash: " << hash << "\n";
  return 0;
}

// --- graph-export -----------------------------------------------------------

int cmd_graph_export(const RunConfig& cfg, const std::string& out_dir) {
  std::string model_path =
      cfg.model.empty() ? (fs::path(out_dir) / "model.json").string() : cfg.model;
  FittedSystem sys = load_system(read_file(model_path));
  fs::path dir = prepare_out_dir(out_dir);
  export_all_graphs(sys, dir);
  std::cout << "graphs: " << dir.string() << "\n";
  return 0;
}

// --- fixture-gen ------------------------------------------------------------

int cmd_fixture(const FixtureSpec& spec, const std::string& out_dir) {
  FixtureData fx = generate_fixture(spec);
  fs::path dir = prepare_out_dir(out_dir);

  write_file(dir / "catalog.csv", catalog_to_csv(fx.catalog));
  write_file(dir / "load_actuals.csv", panel_to_series_csv(fx.load, true));
  write_file(dir / "load_forecasts.csv", panel_to_series_csv(fx.load, false));
  write_file(dir / "wind_actuals.csv", panel_to_series_csv(fx.wind, true));
  write_file(dir / "wind_forecasts.csv", panel_to_series_csv(fx.wind, false));
  write_file(dir / "solar_actuals.csv", panel_to_series_csv(fx.solar, true));
  write_file(dir / "solar_forecasts.csv", panel_to_series_csv(fx.solar, false));
  write_file(dir / "ground_truth.json", fx.ground_truth.dump(1) + "\n");

  RunConfig cfg;
  cfg.load_actuals = (dir / "load_actuals.csv").string();
  cfg.load_forecasts = (dir / "load_forecasts.csv").string();
  cfg.wind_actuals = (dir / "wind_actuals.csv").string();
  cfg.wind_forecasts = (dir / "wind_forecasts.csv").string();
  cfg.solar_actuals = (dir / "solar_actuals.csv").string();
  cfg.solar_forecasts = (dir / "solar_forecasts.csv").string();
  cfg.catalog = (dir / "catalog.csv").string();
  cfg.model = (dir / "model.json").string();
  cfg.out_dir = dir.string();
  cfg.target_day = fx.load.days.back().to_string();
  // A single-year fixture has no prior-year analog days, so the history
  // window must meet select_history's minimum on preceding days alone.
  if (fx.load.days.front().year() == fx.load.days.back().year()) cfg.window_n = 60;
  cfg.seed = spec.seed;
  write_file(dir / "fixture.conf", serialize_config(cfg));

  std::cout << "fixture: " << dir.string() << "\n"
            << "days: " << fx.load.day_count() << "\n"
            << "target_day: " << cfg.target_day << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead scenario generation for load, wind, and solar"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  std::int64_t seed_flag = -1;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config_path,
                                "key = value run configuration file");
    if (config_required) opt->required();
    cmd->add_option("--out", out_flag,
                    "output directory (overrides SCENGEN_OUT and the config)");
    cmd->add_option("--seed", seed_flag, "random seed override")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* fit = app.add_subcommand("fit", "fit the model for one target day");
  add_common(fit, true);
  CLI::App* simulate =
      app.add_subcommand("simulate", "draw scenarios from a fitted model");
  add_common(simulate, true);
  CLI::App* graphs = app.add_subcommand(
      "graph-export", "write dependency graph CSV/DOT files from a model");
  add_common(graphs, true);

  CLI::App* fixture = app.add_subcommand(
      "fixture-gen", "generate a synthetic dataset with known structure");
  FixtureSpec spec;
  fixture->add_option("--zones", spec.zones, "number of zones")
      ->check(CLI::PositiveNumber);
  fixture->add_option("--wind", spec.wind_assets, "number of wind assets")
      ->check(CLI::NonNegativeNumber);
  fixture->add_option("--solar", spec.solar_assets, "number of solar assets")
      ->check(CLI::NonNegativeNumber);
  fixture->add_option("--days", spec.days, "number of days")
      ->check(CLI::PositiveNumber);
  add_common(fixture, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = read_config(config_path);
    if (seed_flag >= 0) cfg.seed = std::uint64_t(seed_flag);
    std::string out_dir = resolve_out(out_flag, cfg.out_dir);

    if (fit->parsed()) return cmd_fit(cfg, out_dir);
    if (simulate->parsed()) return cmd_simulate(cfg, out_dir, cfg.seed);
    if (graphs->parsed()) return cmd_graph_export(cfg, out_dir);
    if (fixture->parsed()) {
      if (seed_flag >= 0) spec.seed = std::uint64_t(seed_flag);
      return cmd_fixture(spec, out_dir);
    }
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 4;
  } catch (const NotPsdError& e) {
    std::cerr << "sampler failure: " << e.what() << "\n";
    return 5;
  } catch (const SingularConstraintError& e) {
    std::cerr << "sampler failure: " << e.what() << "\n";
    return 5;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
