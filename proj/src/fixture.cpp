#include "scengen/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "scengen/csv.hpp"
#include "scengen/errors.hpp"
#include "scengen/mathutil.hpp"
#include "scengen/rng.hpp"
#include "scengen/sampler.hpp"

namespace scengen {

namespace {

// Philox stream blocks, one per independent noise source.
constexpr std::uint64_t kLoadStream = 0;                 // one stream per day
constexpr std::uint64_t kFactorStream = 1u << 20;        // one per zone
constexpr std::uint64_t kWindStream = (1u << 20) + 4096;  // one per asset
constexpr std::uint64_t kSolarStream = (1u << 21);        // one per asset

Eigen::MatrixXd ar1(int n, double rho) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::pow(rho, std::abs(i - j));
  return m;
}

DeviationPanel empty_panel(const std::vector<std::string>& units,
                           const std::vector<Date>& days) {
  DeviationPanel p;
  p.units = units;
  p.days = days;
  p.deviations = Eigen::MatrixXd::Zero(int(units.size()) * kLagsPerDay,
                                       int(days.size()));
  p.forecasts = p.deviations;
  return p;
}

// Daylight envelope: positive on [sunrise, sunset], zero elsewhere, with a
// half-step offset so the endpoints stay (just) above zero.
double bell(const FixtureSpec& spec, int lag) {
  if (lag < spec.sunrise_lag || lag > spec.sunset_lag) return 0.0;
  double span = double(spec.sunset_lag - spec.sunrise_lag + 1);
  return std::sin(std::numbers::pi * (lag - spec.sunrise_lag + 0.5) / span);
}

}  // namespace

double fixture_load_quantile(const FixtureSpec& spec, double u) {
  double p = spec.load_tail_fraction;
  double threshold = spec.load_body_sigma * normal_quantile(1.0 - p);
  auto tail = [&](double survival) {
    return threshold + spec.load_tail_beta / spec.load_tail_xi *
                           (std::pow(survival / p, -spec.load_tail_xi) - 1.0);
  };
  if (u >= 1.0 - p) return tail(1.0 - u);
  if (u <= p) return -tail(u);
  return spec.load_body_sigma * normal_quantile(u);
}

FixtureData generate_fixture(const FixtureSpec& spec) {
  if (spec.zones < 1 || spec.wind_assets < 0 || spec.solar_assets < 0 ||
      spec.days < 2)
    throw ConfigError("fixture needs at least one zone and two days");
  const int nz = spec.zones, nd = spec.days;
  const double pi = std::numbers::pi;

  FixtureData fx;
  std::vector<Date> days(static_cast<size_t>(nd));
  for (int d = 0; d < nd; ++d) days[size_t(d)] = spec.start_day.plus_days(d);

  // Catalog: zones on a 4-wide grid, assets jittered around zone centers.
  std::vector<double> zone_lat(static_cast<size_t>(nz));
  std::vector<double> zone_lon(static_cast<size_t>(nz));
  for (int z = 0; z < nz; ++z) {
    zone_lat[size_t(z)] = 43.0 + 1.1 * (z / 4);
    zone_lon[size_t(z)] = 4.0 + 0.9 * (z % 4);
    fx.catalog.zones.push_back("Z" + std::to_string(z + 1));
  }
  auto asset_name = [](const char* prefix, int i) {
    return std::string(prefix) + (i + 1 < 10 ? "0" : "") + std::to_string(i + 1);
  };
  std::vector<double> wind_cap, solar_cap;
  for (int a = 0; a < spec.wind_assets; ++a) {
    int z = a % nz;
    wind_cap.push_back(30.0 + 5.0 * (a % 3));
    fx.catalog.assets.push_back({asset_name("W", a), "wind",
                                 fx.catalog.zones[size_t(z)],
                                 zone_lat[size_t(z)] + 0.08 * (a / nz % 3 - 1),
                                 zone_lon[size_t(z)] + 0.06 * (a / nz % 2),
                                 wind_cap.back()});
  }
  for (int a = 0; a < spec.solar_assets; ++a) {
    int z = a % nz;
    solar_cap.push_back(50.0 + 10.0 * (a % 4));
    fx.catalog.assets.push_back({asset_name("S", a), "solar",
                                 fx.catalog.zones[size_t(z)],
                                 zone_lat[size_t(z)] - 0.07 * (a / nz % 3 - 1),
                                 zone_lon[size_t(z)] - 0.05 * (a / nz % 2),
                                 solar_cap.back()});
  }
  validate_catalog(fx.catalog);

  // Per-zone day factors that couple each zone's load with its solar fleet
  // (never wind). Keeping the factor zonal makes each planted load-solar
  // dependence a direct edge instead of one diluted across all zones.
  Eigen::MatrixXd factor(nz, nd);
  for (int z = 0; z < nz; ++z) {
    PhiloxRng rng(spec.seed, kFactorStream + std::uint64_t(z));
    for (int d = 0; d < nd; ++d) factor(z, d) = rng.next_normal();
  }

  // Load: Gaussian copula field with AR(1) Kronecker structure plus the day
  // factor, pushed through the heavy-tailed marginal quantile.
  {
    std::vector<std::string> units = fx.catalog.zones;
    fx.load = empty_panel(units, days);
    Eigen::MatrixXd field = sample_kronecker(ar1(nz, spec.rho_spatial),
                                             ar1(kLagsPerDay, spec.rho_temporal),
                                             nd, spec.seed, kLoadStream);
    double c = spec.load_factor_loading;
    double mix = std::sqrt(1.0 - c * c);
    for (int d = 0; d < nd; ++d) {
      for (int z = 0; z < nz; ++z) {
        for (int l = 0; l < kLagsPerDay; ++l) {
          double zval = mix * field(d, z * kLagsPerDay + l) + c * factor(z, d);
          double dev = fixture_load_quantile(spec, normal_cdf(zval));
          double fc = 800.0 + 150.0 * std::sin(pi * l / 23.0) + 35.0 * z +
                      25.0 * std::sin(2.0 * pi * d / 365.2425);
          int r = fx.load.row(z, l);
          fx.load.forecasts(r, d) = fc;
          fx.load.deviations(r, d) = dev;
        }
      }
    }
  }

  // Wind: independent per asset, heteroskedastic around a wandering forecast.
  {
    std::vector<std::string> units;
    for (int a = 0; a < spec.wind_assets; ++a) units.push_back(asset_name("W", a));
    fx.wind = empty_panel(units, days);
    for (int a = 0; a < spec.wind_assets; ++a) {
      PhiloxRng rng(spec.seed, kWindStream + std::uint64_t(a));
      double cap = wind_cap[size_t(a)];
      for (int d = 0; d < nd; ++d) {
        for (int l = 0; l < kLagsPerDay; ++l) {
          double fc = cap * (0.32 + 0.2 * std::sin(2.0 * pi * d / 9.3 + 0.7 * a) +
                             0.1 * std::sin(2.0 * pi * l / 24.0 + 0.4 * a));
          double spread = spec.wind_spread_floor * cap + spec.wind_spread_slope * fc;
          double actual = std::clamp(fc + spread * rng.next_normal(), 0.0, cap);
          int r = fx.wind.row(a, l);
          fx.wind.forecasts(r, d) = fc;
          fx.wind.deviations(r, d) = actual - fc;
        }
      }
    }
  }

  // Solar: rank-3 deviations under the bell envelope; the leading score mixes
  // in the shared day factor. Every shape carries the envelope so deviations
  // stay a bounded multiple of the forecast and clipping stays rare.
  {
    std::vector<std::string> units;
    for (int a = 0; a < spec.solar_assets; ++a) units.push_back(asset_name("S", a));
    fx.solar = empty_panel(units, days);
    double cs = spec.solar_factor_loading;
    double mix = std::sqrt(1.0 - cs * cs);
    for (int a = 0; a < spec.solar_assets; ++a) {
      PhiloxRng rng(spec.seed, kSolarStream + std::uint64_t(a));
      double cap = solar_cap[size_t(a)];
      double amp = spec.solar_amplitude * cap;
      int zone = a % nz;
      for (int d = 0; d < nd; ++d) {
        double g1 = rng.next_normal(), g2 = rng.next_normal(), g3 = rng.next_normal();
        if (spec.solar_rank < 3) g3 = 0.0;
        if (spec.solar_rank < 2) g2 = 0.0;
        double lead = mix * g1 + cs * factor(zone, d);
        double season = 0.75 + 0.25 * std::sin(2.0 * pi * (d - 80.0) / 365.2425);
        for (int l = 0; l < kLagsPerDay; ++l) {
          double env = bell(spec, l);
          double fc = cap * 0.75 * env * season;
          double tilt = env * (spec.sunset_lag - l) / 12.0;
          double slope = env * (l - 12.0) / 6.0;
          double dev = amp * (env * lead + 0.5 * tilt * g2 + 0.35 * slope * g3);
          double actual = std::clamp(fc + dev, 0.0, cap);
          int r = fx.solar.row(a, l);
          fx.solar.forecasts(r, d) = fc;
          fx.solar.deviations(r, d) = actual - fc;
        }
      }
    }
  }

  nlohmann::ordered_json truth;
  truth["format"] = "scengen-fixture-truth/1";
  truth["seed"] = spec.seed;
  truth["zones"] = spec.zones;
  truth["wind_assets"] = spec.wind_assets;
  truth["solar_assets"] = spec.solar_assets;
  truth["days"] = spec.days;
  truth["start_day"] = spec.start_day.to_string();
  truth["sunrise_lag"] = spec.sunrise_lag;
  truth["sunset_lag"] = spec.sunset_lag;
  truth["load"] = {{"body_sigma", spec.load_body_sigma},
                   {"tail_xi", spec.load_tail_xi},
                   {"tail_beta", spec.load_tail_beta},
                   {"tail_fraction", spec.load_tail_fraction},
                   {"rho_spatial", spec.rho_spatial},
                   {"rho_temporal", spec.rho_temporal},
                   {"factor_loading", spec.load_factor_loading}};
  truth["wind"] = {{"independent", true},
                   {"spread_floor", spec.wind_spread_floor},
                   {"spread_slope", spec.wind_spread_slope}};
  truth["solar"] = {{"rank", spec.solar_rank},
                    {"factor_loading", spec.solar_factor_loading},
                    {"amplitude", spec.solar_amplitude}};
  nlohmann::ordered_json planted = nlohmann::ordered_json::array();
  std::vector<bool> zone_has_solar(size_t(nz), false);
  for (int a = 0; a < spec.solar_assets; ++a) zone_has_solar[size_t(a % nz)] = true;
  for (int z = 0; z < nz; ++z) {
    if (!zone_has_solar[size_t(z)]) continue;
    planted.push_back({std::string("load:") + fx.catalog.zones[size_t(z)],
                       std::string("solar:") + fx.catalog.zones[size_t(z)]});
  }
  truth["planted_edges"] = {{"load_solar", planted}, {"wind_cross_edges", 0}};
  fx.ground_truth = std::move(truth);
  return fx;
}

std::string panel_to_series_csv(const DeviationPanel& panel, bool actuals) {
  std::string out = "unit_id,timestamp,value\n";
  for (int u = 0; u < panel.unit_count(); ++u) {
    for (int d = 0; d < panel.day_count(); ++d) {
      for (int l = 0; l < kLagsPerDay; ++l) {
        double v = panel.forecast(u, l, d);
        if (actuals) v += panel.deviation(u, l, d);
        char hh[8];
        std::snprintf(hh, sizeof hh, "T%02d:00", l);
        out += panel.units[size_t(u)] + "," + panel.days[size_t(d)].to_string() +
               hh + "," + format_mw(v) + "\n";
      }
    }
  }
  return out;
}

}  // namespace scengen
