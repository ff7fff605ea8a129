#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scengen/ingest.hpp"
#include "scengen/marginals.hpp"
#include "scengen/precision.hpp"
#include "scengen/solarpca.hpp"
#include "scengen/timegrid.hpp"

namespace scengen {

struct Asset {
  std::string asset_id;
  std::string quantity;  // "wind" or "solar"
  std::string zone_id;
  double latitude = 0.0;
  double longitude = 0.0;
  double capacity_mw = 0.0;
};

struct AssetCatalog {
  std::vector<Asset> assets;
  std::vector<std::string> zones;

  // Assets of one quantity in catalog order.
  std::vector<Asset> of_quantity(const std::string& quantity) const;
  int zone_index(const std::string& zone_id) const;
};

// Asset ids unique, quantities known, every asset in a listed zone.
void validate_catalog(const AssetCatalog& catalog);

struct EngineConfig {
  std::vector<double> lambda_grid{0.01, 0.05, 0.1, 0.2};
  double ebic_gamma = 0.5;
  // > 0 pins the wind distance-penalty base instead of selecting it from
  // the lambda grid.
  double wind_distance_base = 0.0;
  double tail_fraction = 0.15;
  int bins = 10;
  double pca_threshold = 0.95;
  double edge_threshold = 0.01;  // dependency-graph export threshold
  // Load marginal family: "gpd" (semi-parametric tails), "empirical", or
  // "normal" (the light-tail ablation).
  std::string load_marginal = "gpd";
};

// Everything fitted on one history window. Marginal vectors are indexed
// unit * 24 + lag in the unit order of the corresponding panel.
struct FittedSystem {
  AssetCatalog catalog;
  DayWindow window;

  std::vector<Marginal> load_marginals;   // zones x 24
  std::vector<Marginal> wind_marginals;   // wind assets x 24
  std::vector<Marginal> solar_marginals;  // solar assets x 24
  std::vector<std::string> wind_units;
  std::vector<std::string> solar_units;

  SeparableGaussianModel load_model;
  SeparableGaussianModel wind_model;
  std::vector<std::optional<BinnedConditionalModel>> wind_bins;
  SolarPcaModel solar_model;

  // Joint glasso over the standardized zonal diurnal aggregates, column
  // order load:zones, wind:zones, solar:zones.
  PrecisionEstimate joint;
  ColumnStats joint_stats;
  std::vector<std::string> joint_labels;
  bool wind_independent = false;

  int sunrise_lag = 0;
  int sunset_lag = 23;

  struct Penalties {
    double load_spatial = 0.0, load_temporal = 0.0;
    double wind_spatial = 0.0, wind_temporal = 0.0;
    double solar_spatial = 0.0, solar_component = 0.0;
    double joint = 0.0;
  } penalties;

  std::vector<std::string> warnings;
};

// Smallest and largest lag whose pooled solar actuals are positive on at
// least min_day_fraction of the window days.
std::pair<int, int> detect_diurnal_range(const DeviationPanel& solar,
                                         double threshold_mw = 1e-6,
                                         double min_day_fraction = 0.05);

// Fits marginals, the three separable Gaussian models, and the joint zonal
// aggregate model on the window days of the three panels. Panel unit orders
// must match the catalog (zones for load, per-quantity assets otherwise).
FittedSystem fit_system(const DeviationPanel& load, const DeviationPanel& wind,
                        const DeviationPanel& solar,
                        const AssetCatalog& catalog, const DayWindow& window,
                        const EngineConfig& config = {});

// Point forecasts for the target day, rows in fitted unit order.
struct DayForecasts {
  Eigen::MatrixXd load;   // zones x 24, MW
  Eigen::MatrixXd wind;   // wind assets x 24
  Eigen::MatrixXd solar;  // solar assets x 24
};

struct ScenarioSet {
  Date target_day;
  std::string quantity;
  std::vector<std::string> unit_ids;
  std::vector<Eigen::MatrixXd> scenarios;  // m cubes of units x 24, MW
  Eigen::MatrixXd forecasts;               // units x 24
  std::uint64_t seed = 0;
  std::string model_hash;
  bool in_sample = false;
};

struct ScenarioBundle {
  ScenarioSet load;
  ScenarioSet wind;
  ScenarioSet solar;
};

// Monte Carlo scenarios for one day: wind from its own separable model and
// forecast-binned reconstruction; load and solar jointly, conditioned on a
// shared draw of zonal diurnal aggregates. Deterministic per (seed, m).
ScenarioBundle generate_scenarios(const FittedSystem& system,
                                  const Date& target_day,
                                  const DayForecasts& forecasts, int m,
                                  std::uint64_t seed);

struct BandStatistics {
  Eigen::MatrixXd lower;     // units x 24
  Eigen::MatrixXd upper;
  std::vector<double> mape;  // per scenario; empty when no actuals given
};

// Empirical [trim, 1 - trim] band across scenarios per (unit, lag), plus
// per-scenario MAPE against actuals when supplied (floor 1 MW).
BandStatistics band_statistics(const ScenarioSet& set, double trim = 0.01,
                               const Eigen::MatrixXd* actuals = nullptr);

}  // namespace scengen
