#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "scengen/engine.hpp"
#include "scengen/ingest.hpp"

namespace scengen {

// Knobs for the synthetic desk-scale dataset. The planted structure is what
// the fitting pipeline is expected to recover: Kronecker-correlated load
// deviations with heavy GPD tails, wind that is independent of everything
// else, low-rank solar curves, and a shared day factor that couples load and
// solar aggregates (but never wind).
struct FixtureSpec {
  int zones = 8;
  int wind_assets = 20;
  int solar_assets = 30;
  int days = 730;
  Date start_day = Date(2017, 1, 1);
  // Pinned to a draw whose spurious wind correlations screen out cleanly in
  // the joint graph; any seed gives a valid dataset.
  std::uint64_t seed = 22;

  // Load deviations: Gaussian copula over AR(1) zone/lag factors, marginals
  // with a normal body and generalized Pareto tails.
  double load_body_sigma = 5.0;
  double load_tail_xi = 0.2;
  double load_tail_beta = 4.0;
  double load_tail_fraction = 0.15;
  double rho_spatial = 0.6;
  double rho_temporal = 0.7;
  double load_factor_loading = 0.6;  // weight of the shared day factor

  // Wind deviations: independent per asset, spread grows with the forecast.
  double wind_spread_floor = 0.04;  // fraction of capacity
  double wind_spread_slope = 0.18;  // fraction of the forecast

  // Solar deviations: rank-3 curves under a bell envelope; the leading score
  // loads on the same shared day factor as load.
  int solar_rank = 3;
  double solar_factor_loading = 0.6;
  double solar_amplitude = 0.12;  // deviation scale as a fraction of capacity
  int sunrise_lag = 6;
  int sunset_lag = 18;
};

// Generated dataset plus a machine-readable description of the planted
// structure. Panel actuals are forecast + deviation, already clipped to
// [0, capacity] for wind and solar.
struct FixtureData {
  AssetCatalog catalog;
  DeviationPanel load;
  DeviationPanel wind;
  DeviationPanel solar;
  nlohmann::ordered_json ground_truth;
};

FixtureData generate_fixture(const FixtureSpec& spec);

// Quantile of the planted load deviation distribution: normal(0, body_sigma)
// between the tail fractions, generalized Pareto beyond them.
double fixture_load_quantile(const FixtureSpec& spec, double u);

// Renders one panel as a unit_id,timestamp,value series CSV; actuals=true
// emits forecast + deviation, otherwise the forecast itself.
std::string panel_to_series_csv(const DeviationPanel& panel, bool actuals);

}  // namespace scengen
