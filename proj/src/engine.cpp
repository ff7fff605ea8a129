#include "scengen/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "scengen/errors.hpp"
#include "scengen/mathutil.hpp"
#include "scengen/rng.hpp"
#include "scengen/sampler.hpp"

namespace scengen {

namespace {

// Stream layout for one generate_scenarios call: each block gets one counter
// stream per scenario, so the four sampling stages never share randomness
// and each stage is reproducible in isolation.
constexpr int kWindBlock = 0;
constexpr int kJointBlock = 1;
constexpr int kLoadBlock = 2;
constexpr int kSolarBlock = 3;

std::uint64_t stream_base(int block, int m) {
  return std::uint64_t(block) * std::uint64_t(m);
}

bool is_constant(const std::vector<double>& xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *hi - *lo <= 0.0;
}

std::vector<std::string> hour_labels() {
  std::vector<std::string> labels;
  labels.reserve(kLagsPerDay);
  for (int l = 0; l < kLagsPerDay; ++l) {
    labels.push_back((l < 10 ? "h0" : "h") + std::to_string(l));
  }
  return labels;
}

Marginal fit_cell_marginal(const std::vector<double>& series,
                           const std::string& family, double tail_fraction,
                           const std::string& label,
                           std::vector<std::string>& warnings) {
  if (is_constant(series)) {
    return ConstantModel{series.front()};
  }
  if (family == "gpd") {
    auto fit = fit_gpd_tails(series, tail_fraction);
    for (auto& w : fit.warnings) warnings.push_back(label + ": " + w);
    return std::move(fit.marginal);
  }
  if (family == "empirical") {
    return fit_empirical(series);
  }
  if (family == "normal") {
    return fit_normal(series);
  }
  throw ConfigError("unknown marginal family '" + family + "'");
}

// z panel for one quantity: rows unit*24+lag (same layout as the deviation
// panel), columns days. Marginals come out in the same row order.
struct GaussianizedPanel {
  Eigen::MatrixXd z;
  std::vector<Marginal> marginals;
};

GaussianizedPanel gaussianize_panel(const DeviationPanel& panel,
                                    const std::string& family,
                                    double tail_fraction,
                                    const std::string& quantity,
                                    std::vector<std::string>& warnings) {
  GaussianizedPanel out;
  out.z.resize(panel.deviations.rows(), panel.day_count());
  out.marginals.reserve(size_t(panel.deviations.rows()));
  for (int u = 0; u < panel.unit_count(); ++u) {
    for (int l = 0; l < kLagsPerDay; ++l) {
      const auto series = panel.deviation_series(u, l);
      const std::string label =
          quantity + " " + panel.units[size_t(u)] + " lag " + std::to_string(l);
      Marginal marginal =
          fit_cell_marginal(series, family, tail_fraction, label, warnings);
      const auto zs = to_gaussian(series, marginal);
      for (int d = 0; d < panel.day_count(); ++d) {
        out.z(panel.row(u, l), d) = zs[size_t(d)];
      }
      out.marginals.push_back(std::move(marginal));
    }
  }
  return out;
}

// Day matrices (units x 24) for gemini from a z panel.
std::vector<Eigen::MatrixXd> day_matrices(const Eigen::MatrixXd& z,
                                          int units) {
  std::vector<Eigen::MatrixXd> days;
  days.reserve(size_t(z.cols()));
  for (int d = 0; d < z.cols(); ++d) {
    Eigen::MatrixXd day(units, kLagsPerDay);
    for (int u = 0; u < units; ++u) {
      day.row(u) = z.col(d).segment(u * kLagsPerDay, kLagsPerDay).transpose();
    }
    days.push_back(std::move(day));
  }
  return days;
}

PrecisionEstimate identity_estimate(int p) {
  PrecisionEstimate est;
  est.Theta = Eigen::MatrixXd::Identity(p, p);
  est.Sigma = Eigen::MatrixXd::Identity(p, p);
  est.converged = true;
  est.notes.push_back("degenerate input; identity model");
  return est;
}

SeparableGaussianModel identity_separable(int p, int q) {
  SeparableGaussianModel model;
  model.spatial = identity_estimate(p);
  model.temporal = identity_estimate(q);
  return model;
}

void require_converged(const PrecisionEstimate& est, const std::string& what) {
  if (!est.converged) {
    throw ConvergenceError(what + " did not converge");
  }
}

// Separable fit with eBIC-selected scalar penalties on both factors. Units
// whose z series are entirely constant are excluded from the fit and pasted
// back as isolated nodes, since a zero-variance row breaks the correlation
// normalization and carries no dependence information anyway.
struct SeparableFit {
  SeparableGaussianModel model;
  double spatial_lambda = 0.0;
  double temporal_lambda = 0.0;
};

Eigen::MatrixXd embed_isolated(const Eigen::MatrixXd& active, int full,
                               const std::vector<int>& active_idx) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(full, full);
  for (int i = 0; i < active.rows(); ++i) {
    for (int j = 0; j < active.cols(); ++j) {
      out(active_idx[size_t(i)], active_idx[size_t(j)]) = active(i, j);
    }
  }
  return out;
}

SeparableFit fit_separable(
    const std::vector<Eigen::MatrixXd>& days, const EngineConfig& config,
    const std::string& what, std::vector<std::string>& warnings,
    const std::function<Eigen::MatrixXd(double)>& spatial_build = nullptr,
    double pinned_spatial = 0.0) {
  const int p = int(days.front().rows());
  const int q = int(days.front().cols());
  const double n_days = double(days.size());

  std::vector<int> active;
  for (int u = 0; u < p; ++u) {
    double spread = 0.0;
    for (const auto& day : days) {
      spread = std::max(
          spread, day.row(u).maxCoeff() - day.row(u).minCoeff());
      if (spread > 0.0) break;
    }
    double across = 0.0;
    for (const auto& day : days) {
      across = std::max(across,
                        (day.row(u) - days.front().row(u)).cwiseAbs().maxCoeff());
    }
    if (spread > 0.0 || across > 0.0) active.push_back(u);
  }

  SeparableFit fit;
  if (active.empty()) {
    warnings.push_back(what + ": all units constant; identity model");
    fit.model = identity_separable(p, q);
    return fit;
  }

  std::vector<Eigen::MatrixXd> reduced;
  if (int(active.size()) == p) {
    reduced = days;
  } else {
    warnings.push_back(what + ": " + std::to_string(p - int(active.size())) +
                       " constant unit(s) isolated in the spatial factor");
    reduced.reserve(days.size());
    for (const auto& day : days) {
      Eigen::MatrixXd sub(int(active.size()), q);
      for (size_t i = 0; i < active.size(); ++i) {
        sub.row(int(i)) = day.row(active[i]);
      }
      reduced.push_back(std::move(sub));
    }
  }

  const auto grams = gemini_grams(reduced);
  const int ap = int(grams.first.rows());

  // A custom spatial penalty is sized for the full unit set, so fall back to
  // the scalar broadcast when constant units were removed.
  const bool use_custom = spatial_build != nullptr && ap == p;
  const auto spatial_pen = use_custom
                               ? spatial_build
                               : std::function<Eigen::MatrixXd(double)>(
                                     [ap](double lam) {
                                       return scalar_penalty(ap, lam);
                                     });
  double spatial_lambda = pinned_spatial;
  if (!(pinned_spatial > 0.0)) {
    spatial_lambda =
        select_penalty(grams.first, n_days * double(q), config.lambda_grid,
                       config.ebic_gamma, spatial_pen)
            .lambda;
  }
  const auto temporal_sel = select_penalty(
      grams.second, n_days * double(ap), config.lambda_grid,
      config.ebic_gamma,
      [q](double lam) { return scalar_penalty(q, lam); });
  fit.spatial_lambda = spatial_lambda;
  fit.temporal_lambda = temporal_sel.lambda;

  auto model = gemini(reduced, spatial_pen(spatial_lambda),
                      scalar_penalty(q, temporal_sel.lambda));
  require_converged(model.spatial, what + " spatial factor");
  require_converged(model.temporal, what + " temporal factor");

  if (int(active.size()) != p) {
    PrecisionEstimate full;
    full.Theta = embed_isolated(model.spatial.Theta, p, active);
    full.Sigma = embed_isolated(model.spatial.Sigma, p, active);
    full.converged = model.spatial.converged;
    full.notes = model.spatial.notes;
    model.spatial = std::move(full);
  }
  fit.model = std::move(model);
  return fit;
}

// Mean/sd standardization that tolerates constant columns (sd set to 1), for
// the joint aggregate matrix where a degenerate quantity would otherwise
// poison the fit.
ColumnStats standardize_lenient(Eigen::MatrixXd& X,
                                const std::vector<std::string>& labels,
                                std::vector<std::string>& warnings) {
  ColumnStats stats;
  const double n = double(X.rows());
  for (int j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    double sd = std::sqrt((X.col(j).array() - mean).square().sum() / n);
    if (!(sd > 1e-12)) {
      warnings.push_back("joint aggregate '" + labels[size_t(j)] +
                         "' is constant; treated as independent noise");
      sd = 1.0;
    }
    X.col(j) = (X.col(j).array() - mean) / sd;
    stats.mean.push_back(mean);
    stats.sd.push_back(sd);
  }
  return stats;
}

// Diurnal (lag-range) sum of one unit's z values for one day.
double diurnal_sum(const Eigen::MatrixXd& z, int unit, int day, int sunrise,
                   int sunset) {
  double total = 0.0;
  for (int l = sunrise; l <= sunset; ++l) {
    total += z(unit * kLagsPerDay + l, day);
  }
  return total;
}

// Zone membership lists (indices into the quantity's unit order).
std::vector<std::vector<int>> zone_members(const AssetCatalog& catalog,
                                           const std::vector<Asset>& assets) {
  std::vector<std::vector<int>> members(catalog.zones.size());
  for (size_t a = 0; a < assets.size(); ++a) {
    members[size_t(catalog.zone_index(assets[a].zone_id))].push_back(int(a));
  }
  return members;
}

// Constraint matrix for zonal diurnal sums over a (units x 24) z field,
// flattened unit*24+lag. One row per zone.
Eigen::MatrixXd zonal_diurnal_rows(const std::vector<std::vector<int>>& zones,
                                   int units, int sunrise, int sunset) {
  Eigen::MatrixXd A =
      Eigen::MatrixXd::Zero(int(zones.size()), units * kLagsPerDay);
  for (size_t z = 0; z < zones.size(); ++z) {
    for (int u : zones[z]) {
      for (int l = sunrise; l <= sunset; ++l) {
        A(int(z), u * kLagsPerDay + l) = 1.0;
      }
    }
  }
  return A;
}

// Score-space solar constraint: the zonal diurnal sum of reconstructed
// curves is linear in the standardized scores. Returns the row matrix plus
// the per-zone constant offset (center and component-mean contributions).
struct SolarConstraint {
  Eigen::MatrixXd A;             // zones x (assets * k)
  Eigen::VectorXd offset;        // per zone
  std::vector<int> kept_rows;    // rows surviving dependence reduction
};

SolarConstraint solar_score_constraint(
    const SolarPcaModel& model, const std::vector<std::vector<int>>& zones,
    int assets, int sunrise, int sunset) {
  const int k = model.k;
  SolarConstraint sc;
  sc.A = Eigen::MatrixXd::Zero(int(zones.size()), assets * k);
  sc.offset.resize(int(zones.size()));

  double center_sum = 0.0;
  for (int l = sunrise; l <= sunset; ++l) center_sum += model.center(l);
  Eigen::VectorXd loading_sum(k);
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (int l = sunrise; l <= sunset; ++l) s += model.loadings(l, j);
    loading_sum(j) = s;
  }
  const double mean_term = model.component_mean.dot(loading_sum);

  for (size_t z = 0; z < zones.size(); ++z) {
    for (int a : zones[z]) {
      for (int j = 0; j < k; ++j) {
        sc.A(int(z), a * k + j) = model.component_sd(j) * loading_sum(j);
      }
    }
    sc.offset(int(z)) =
        double(zones[z].size()) * (center_sum + mean_term);
  }
  sc.kept_rows = independent_rows(sc.A);
  return sc;
}

}  // namespace

std::vector<Asset> AssetCatalog::of_quantity(const std::string& quantity) const {
  std::vector<Asset> out;
  for (const auto& a : assets) {
    if (a.quantity == quantity) out.push_back(a);
  }
  return out;
}

int AssetCatalog::zone_index(const std::string& zone_id) const {
  for (size_t i = 0; i < zones.size(); ++i) {
    if (zones[i] == zone_id) return int(i);
  }
  throw DataError("zone '" + zone_id + "' is not in the catalog");
}

void validate_catalog(const AssetCatalog& catalog) {
  if (catalog.zones.empty()) throw DataError("catalog lists no zones");
  std::set<std::string> zone_set(catalog.zones.begin(), catalog.zones.end());
  if (zone_set.size() != catalog.zones.size()) {
    throw DataError("catalog zones are not unique");
  }
  std::set<std::string> ids;
  for (const auto& a : catalog.assets) {
    if (!ids.insert(a.asset_id).second) {
      throw DataError("duplicate asset id '" + a.asset_id + "'");
    }
    if (a.quantity != "wind" && a.quantity != "solar") {
      throw DataError("asset '" + a.asset_id + "' has unknown quantity '" +
                      a.quantity + "'");
    }
    if (zone_set.count(a.zone_id) == 0) {
      throw DataError("asset '" + a.asset_id + "' maps to unknown zone '" +
                      a.zone_id + "'");
    }
    if (!(a.capacity_mw >= 0.0)) {
      throw DataError("asset '" + a.asset_id + "' has negative capacity");
    }
  }
}

std::pair<int, int> detect_diurnal_range(const DeviationPanel& solar,
                                         double threshold_mw,
                                         double min_day_fraction) {
  const int days = solar.day_count();
  int sunrise = -1;
  int sunset = -1;
  for (int l = 0; l < kLagsPerDay; ++l) {
    int nonzero_days = 0;
    for (int d = 0; d < days; ++d) {
      double pooled = 0.0;
      for (int u = 0; u < solar.unit_count(); ++u) {
        pooled += solar.deviation(u, l, d) + solar.forecast(u, l, d);
      }
      if (pooled > threshold_mw) ++nonzero_days;
    }
    if (double(nonzero_days) >= min_day_fraction * double(days)) {
      if (sunrise < 0) sunrise = l;
      sunset = l;
    }
  }
  if (sunrise < 0) {
    throw NoDaylightError("solar actuals are zero at every lag");
  }
  return {sunrise, sunset};
}

FittedSystem fit_system(const DeviationPanel& load, const DeviationPanel& wind,
                        const DeviationPanel& solar,
                        const AssetCatalog& catalog, const DayWindow& window,
                        const EngineConfig& config) {
  validate_catalog(catalog);
  const auto wind_assets = catalog.of_quantity("wind");
  const auto solar_assets = catalog.of_quantity("solar");

  auto check_units = [](const DeviationPanel& panel,
                        const std::vector<std::string>& expected,
                        const std::string& what) {
    if (panel.units != expected) {
      throw UnitMismatchError(what +
                              " panel unit order does not match the catalog");
    }
  };
  check_units(load, catalog.zones, "load");
  std::vector<std::string> wind_ids, solar_ids;
  for (const auto& a : wind_assets) wind_ids.push_back(a.asset_id);
  for (const auto& a : solar_assets) solar_ids.push_back(a.asset_id);
  check_units(wind, wind_ids, "wind");
  check_units(solar, solar_ids, "solar");

  // Only the window's days feed any estimate below; this subset is what
  // keeps the fit non-anticipative.
  const DeviationPanel L = load.subset_days(window.history_days);
  const DeviationPanel W = wind.subset_days(window.history_days);
  const DeviationPanel S = solar.subset_days(window.history_days);
  const int n_days = L.day_count();
  const int n_zones = int(catalog.zones.size());

  FittedSystem sys;
  sys.catalog = catalog;
  sys.window = window;
  sys.wind_units = wind_ids;
  sys.solar_units = solar_ids;

  std::tie(sys.sunrise_lag, sys.sunset_lag) = detect_diurnal_range(S);

  // Marginals and Gaussianized panels.
  auto load_g = gaussianize_panel(L, config.load_marginal,
                                  config.tail_fraction, "load", sys.warnings);
  auto wind_g = gaussianize_panel(W, "empirical", config.tail_fraction,
                                  "wind", sys.warnings);
  auto solar_g = gaussianize_panel(S, "empirical", config.tail_fraction,
                                   "solar", sys.warnings);
  sys.load_marginals = std::move(load_g.marginals);
  sys.wind_marginals = std::move(wind_g.marginals);
  sys.solar_marginals = std::move(solar_g.marginals);

  // Load separable model.
  {
    auto fit = fit_separable(day_matrices(load_g.z, n_zones), config, "load",
                             sys.warnings);
    sys.load_model = std::move(fit.model);
    sys.load_model.unit_order = catalog.zones;
    sys.load_model.lag_order = hour_labels();
    sys.penalties.load_spatial = fit.spatial_lambda;
    sys.penalties.load_temporal = fit.temporal_lambda;
  }

  // Wind separable model, distance-proportional spatial penalty.
  {
    std::map<std::string, std::pair<double, double>> coords;
    for (const auto& a : wind_assets) {
      coords[a.asset_id] = {a.latitude, a.longitude};
    }
    std::function<Eigen::MatrixXd(double)> build;
    if (wind_assets.size() > 1) {
      build = [&wind_ids, &coords](double base) {
        return distance_penalty(wind_ids, coords, base);
      };
    }
    auto fit = fit_separable(day_matrices(wind_g.z, int(wind_ids.size())),
                             config, "wind", sys.warnings, build,
                             config.wind_distance_base);
    sys.wind_model = std::move(fit.model);
    sys.wind_model.unit_order = wind_ids;
    sys.wind_model.lag_order = hour_labels();
    sys.penalties.wind_spatial = fit.spatial_lambda;
    sys.penalties.wind_temporal = fit.temporal_lambda;
  }

  // Wind forecast-conditional reconstruction models.
  sys.wind_bins.resize(size_t(wind_ids.size()) * kLagsPerDay);
  for (int u = 0; u < W.unit_count(); ++u) {
    for (int l = 0; l < kLagsPerDay; ++l) {
      const auto devs = W.deviation_series(u, l);
      if (is_constant(devs)) continue;  // marginal already handles it
      std::vector<double> fcst(static_cast<size_t>(n_days));
      for (int d = 0; d < n_days; ++d) fcst[size_t(d)] = W.forecast(u, l, d);
      auto fit = fit_conditional_bins(fcst, devs, config.bins);
      for (auto& w : fit.warnings) {
        sys.warnings.push_back("wind " + wind_ids[size_t(u)] + " lag " +
                               std::to_string(l) + ": " + w);
      }
      sys.wind_bins[size_t(W.row(u, l))] = std::move(fit.model);
    }
  }

  // Solar: pooled PCA, then a separable model over (asset x component).
  {
    const int n_solar = S.unit_count();
    Eigen::MatrixXd pool(n_solar * n_days, kLagsPerDay);
    for (int u = 0; u < n_solar; ++u) {
      for (int d = 0; d < n_days; ++d) {
        for (int l = 0; l < kLagsPerDay; ++l) {
          pool(u * n_days + d, l) = solar_g.z(S.row(u, l), d);
        }
      }
    }
    sys.solar_model = fit_pca(pool, config.pca_threshold);
    for (auto& w : sys.solar_model.warnings) {
      sys.warnings.push_back("solar pca: " + w);
    }

    std::vector<Eigen::MatrixXd> score_days;
    score_days.reserve(size_t(n_days));
    for (int d = 0; d < n_days; ++d) {
      Eigen::MatrixXd curves(n_solar, kLagsPerDay);
      for (int u = 0; u < n_solar; ++u) {
        curves.row(u) =
            solar_g.z.col(d).segment(u * kLagsPerDay, kLagsPerDay).transpose();
      }
      score_days.push_back(project(curves, sys.solar_model));
    }
    auto fit = fit_separable(score_days, config, "solar", sys.warnings);
    sys.solar_model.separable = std::move(fit.model);
    sys.solar_model.separable.unit_order = solar_ids;
    sys.solar_model.separable.lag_order.clear();
    for (int c = 1; c <= sys.solar_model.k; ++c) {
      sys.solar_model.separable.lag_order.push_back("pc" + std::to_string(c));
    }
    sys.penalties.solar_spatial = fit.spatial_lambda;
    sys.penalties.solar_component = fit.temporal_lambda;
  }

  // Joint model over zonal diurnal aggregates: load, wind, solar blocks.
  {
    const auto wind_zones = zone_members(catalog, wind_assets);
    const auto solar_zones = zone_members(catalog, solar_assets);

    Eigen::MatrixXd X(n_days, 3 * n_zones);
    for (int d = 0; d < n_days; ++d) {
      for (int z = 0; z < n_zones; ++z) {
        X(d, z) =
            diurnal_sum(load_g.z, z, d, sys.sunrise_lag, sys.sunset_lag);
        double wsum = 0.0;
        for (int a : wind_zones[size_t(z)]) {
          wsum += diurnal_sum(wind_g.z, a, d, sys.sunrise_lag, sys.sunset_lag);
        }
        X(d, n_zones + z) = wsum;
        double ssum = 0.0;
        for (int a : solar_zones[size_t(z)]) {
          ssum +=
              diurnal_sum(solar_g.z, a, d, sys.sunrise_lag, sys.sunset_lag);
        }
        X(d, 2 * n_zones + z) = ssum;
      }
    }

    for (int z = 0; z < n_zones; ++z) {
      sys.joint_labels.push_back("load:" + catalog.zones[size_t(z)]);
    }
    for (int z = 0; z < n_zones; ++z) {
      sys.joint_labels.push_back("wind:" + catalog.zones[size_t(z)]);
    }
    for (int z = 0; z < n_zones; ++z) {
      sys.joint_labels.push_back("solar:" + catalog.zones[size_t(z)]);
    }

    sys.joint_stats = standardize_lenient(X, sys.joint_labels, sys.warnings);
    Eigen::MatrixXd S_joint = X.transpose() * X / double(n_days);
    // A constant aggregate standardizes to all zeros; give it unit variance
    // so the fit treats it as an isolated standard normal.
    for (int j = 0; j < S_joint.cols(); ++j) {
      if (S_joint(j, j) < 0.5) S_joint(j, j) = 1.0;
    }
    const auto sel = select_penalty(
        S_joint, double(n_days), config.lambda_grid, config.ebic_gamma,
        [&](double lam) { return scalar_penalty(3 * n_zones, lam); });
    sys.penalties.joint = sel.lambda;
    sys.joint = glasso(PenalizedProblem{
        S_joint, scalar_penalty(3 * n_zones, sel.lambda), 1e-8, 1000});
    require_converged(sys.joint, "joint aggregate model");

    const auto graph =
        dependency_graph(sys.joint, sys.joint_labels, config.edge_threshold);
    sys.wind_independent = true;
    for (const auto& e : graph.edges) {
      const bool a_wind = e.a >= n_zones && e.a < 2 * n_zones;
      const bool b_wind = e.b >= n_zones && e.b < 2 * n_zones;
      if (a_wind != b_wind) {
        sys.wind_independent = false;
        break;
      }
    }
    if (!sys.wind_independent) {
      sys.warnings.push_back(
          "joint graph links wind to load/solar; wind is still simulated "
          "from its marginal model");
    }
  }

  // Surface solar constraint rows that are unreachable in the truncated
  // component space; generation will drop them.
  {
    const auto solar_zones = zone_members(catalog, solar_assets);
    const auto sc =
        solar_score_constraint(sys.solar_model, solar_zones,
                               int(solar_ids.size()), sys.sunrise_lag,
                               sys.sunset_lag);
    if (int(sc.kept_rows.size()) < n_zones) {
      for (int z = 0; z < n_zones; ++z) {
        if (std::find(sc.kept_rows.begin(), sc.kept_rows.end(), z) ==
            sc.kept_rows.end()) {
          sys.warnings.push_back(
              "solar aggregate constraint for zone '" +
              catalog.zones[size_t(z)] +
              "' is unreachable in the retained component space; it will be "
              "dropped during generation");
        }
      }
    }
  }

  return sys;
}

ScenarioBundle generate_scenarios(const FittedSystem& system,
                                  const Date& target_day,
                                  const DayForecasts& forecasts, int m,
                                  std::uint64_t seed) {
  const int n_zones = int(system.catalog.zones.size());
  const int n_wind = int(system.wind_units.size());
  const int n_solar = int(system.solar_units.size());
  if (forecasts.load.rows() != n_zones ||
      forecasts.load.cols() != kLagsPerDay ||
      forecasts.wind.rows() != n_wind ||
      forecasts.wind.cols() != kLagsPerDay ||
      forecasts.solar.rows() != n_solar ||
      forecasts.solar.cols() != kLagsPerDay) {
    throw DataError("forecast matrices do not match the fitted unit counts");
  }
  if (m < 0) throw ConfigError("scenario count must be nonnegative");
  if (!forecasts.load.allFinite() || !forecasts.wind.allFinite() ||
      !forecasts.solar.allFinite()) {
    throw DataError("forecasts contain non-finite values");
  }

  ScenarioBundle bundle;
  auto init_set = [&](ScenarioSet& set, const std::string& quantity,
                      const std::vector<std::string>& units,
                      const Eigen::MatrixXd& fcst) {
    set.target_day = target_day;
    set.quantity = quantity;
    set.unit_ids = units;
    set.forecasts = fcst;
    set.seed = seed;
    set.in_sample = system.window.in_sample;
    set.scenarios.reserve(size_t(m));
  };
  init_set(bundle.load, "load", system.catalog.zones, forecasts.load);
  init_set(bundle.wind, "wind", system.wind_units, forecasts.wind);
  init_set(bundle.solar, "solar", system.solar_units, forecasts.solar);

  const auto wind_assets = system.catalog.of_quantity("wind");
  const auto solar_assets = system.catalog.of_quantity("solar");

  // --- Wind: separable draw, forecast-binned reconstruction. -------------
  {
    const auto z = sample_kronecker(system.wind_model.spatial.Sigma,
                                    system.wind_model.temporal.Sigma, m, seed,
                                    stream_base(kWindBlock, m));
    for (int i = 0; i < m; ++i) {
      Eigen::MatrixXd scen(n_wind, kLagsPerDay);
      for (int a = 0; a < n_wind; ++a) {
        const double cap = wind_assets[size_t(a)].capacity_mw;
        for (int l = 0; l < kLagsPerDay; ++l) {
          const double u = normal_cdf(z(i, a * kLagsPerDay + l));
          const double fc = forecasts.wind(a, l);
          const auto& bins = system.wind_bins[size_t(a * kLagsPerDay + l)];
          const double dev =
              bins ? conditional_sample_value(*bins, fc, u)
                   : quantile(system.wind_marginals[size_t(a * kLagsPerDay + l)],
                              u);
          scen(a, l) = std::clamp(fc + dev, 0.0, cap);
        }
      }
      if (!scen.allFinite()) {
        throw DataError("wind scenario produced a non-finite value");
      }
      bundle.wind.scenarios.push_back(std::move(scen));
    }
  }

  // --- Step 1: joint draw of zonal diurnal aggregates (load + solar). ----
  Eigen::MatrixXd agg_load(m, n_zones);
  Eigen::MatrixXd agg_solar(m, n_zones);
  {
    std::vector<int> idx;
    for (int z = 0; z < n_zones; ++z) idx.push_back(z);
    for (int z = 0; z < n_zones; ++z) idx.push_back(2 * n_zones + z);
    Eigen::MatrixXd sub(int(idx.size()), int(idx.size()));
    for (size_t a = 0; a < idx.size(); ++a) {
      for (size_t b = 0; b < idx.size(); ++b) {
        sub(int(a), int(b)) = system.joint.Sigma(idx[a], idx[b]);
      }
    }
    const auto y =
        sample_mvn(sub, m, seed, stream_base(kJointBlock, m));
    for (int i = 0; i < m; ++i) {
      for (int z = 0; z < n_zones; ++z) {
        agg_load(i, z) = y(i, z) * system.joint_stats.sd[size_t(z)] +
                         system.joint_stats.mean[size_t(z)];
        agg_solar(i, z) =
            y(i, n_zones + z) *
                system.joint_stats.sd[size_t(2 * n_zones + z)] +
            system.joint_stats.mean[size_t(2 * n_zones + z)];
      }
    }
  }

  // --- Step 2: load field conditioned on its zonal diurnal sums. ---------
  {
    std::vector<std::vector<int>> zone_rows(static_cast<size_t>(n_zones));
    for (int z = 0; z < n_zones; ++z) zone_rows[size_t(z)] = {z};
    const Eigen::MatrixXd A = zonal_diurnal_rows(
        zone_rows, n_zones, system.sunrise_lag, system.sunset_lag);
    const Eigen::MatrixXd SAt =
        kronecker_cross(system.load_model.spatial.Sigma,
                        system.load_model.temporal.Sigma, A);
    const Eigen::MatrixXd K = projection_gain(SAt, A);
    const auto base = sample_kronecker(
        system.load_model.spatial.Sigma, system.load_model.temporal.Sigma, m,
        seed, stream_base(kLoadBlock, m));

    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd x = base.row(i).transpose();
      const Eigen::VectorXd b = agg_load.row(i).transpose();
      x -= K * (A * x - b);
      if ((A * x - b).cwiseAbs().maxCoeff() > 1e-6) {
        throw SingularConstraintError(
            "load scenario violated its aggregate constraint");
      }
      Eigen::MatrixXd scen(n_zones, kLagsPerDay);
      for (int zidx = 0; zidx < n_zones; ++zidx) {
        for (int l = 0; l < kLagsPerDay; ++l) {
          const double u = normal_cdf(x(zidx * kLagsPerDay + l));
          const double dev = quantile(
              system.load_marginals[size_t(zidx * kLagsPerDay + l)], u);
          scen(zidx, l) = forecasts.load(zidx, l) + dev;
        }
      }
      if (!scen.allFinite()) {
        throw DataError("load scenario produced a non-finite value");
      }
      bundle.load.scenarios.push_back(std::move(scen));
    }
  }

  // --- Step 3: solar scores conditioned on zonal diurnal aggregates. -----
  {
    const auto solar_zones = zone_members(system.catalog, solar_assets);
    const auto sc = solar_score_constraint(system.solar_model, solar_zones,
                                           n_solar, system.sunrise_lag,
                                           system.sunset_lag);
    const int k = system.solar_model.k;
    const int kept = int(sc.kept_rows.size());

    Eigen::MatrixXd A_kept(kept, n_solar * k);
    for (int r = 0; r < kept; ++r) A_kept.row(r) = sc.A.row(sc.kept_rows[r]);

    Eigen::MatrixXd K;
    if (kept > 0) {
      const Eigen::MatrixXd SAt = kronecker_cross(
          system.solar_model.separable.spatial.Sigma,
          system.solar_model.separable.temporal.Sigma, A_kept);
      K = projection_gain(SAt, A_kept);
    }
    const auto base = sample_kronecker(
        system.solar_model.separable.spatial.Sigma,
        system.solar_model.separable.temporal.Sigma, m, seed,
        stream_base(kSolarBlock, m));

    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd x = base.row(i).transpose();
      if (kept > 0) {
        Eigen::VectorXd b(kept);
        for (int r = 0; r < kept; ++r) {
          const int z = sc.kept_rows[r];
          b(r) = agg_solar(i, z) - sc.offset(z);
        }
        x -= K * (A_kept * x - b);
        if ((A_kept * x - b).cwiseAbs().maxCoeff() > 1e-6) {
          throw SingularConstraintError(
              "solar scenario violated its aggregate constraint");
        }
      }
      Eigen::MatrixXd scores(n_solar, k);
      for (int a = 0; a < n_solar; ++a) {
        scores.row(a) = x.segment(a * k, k).transpose();
      }
      const Eigen::MatrixXd curves = reconstruct(scores, system.solar_model);
      Eigen::MatrixXd scen(n_solar, kLagsPerDay);
      for (int a = 0; a < n_solar; ++a) {
        const double cap = solar_assets[size_t(a)].capacity_mw;
        for (int l = 0; l < kLagsPerDay; ++l) {
          const double u = normal_cdf(curves(a, l));
          const double dev = quantile(
              system.solar_marginals[size_t(a * kLagsPerDay + l)], u);
          scen(a, l) = std::clamp(forecasts.solar(a, l) + dev, 0.0, cap);
        }
      }
      if (!scen.allFinite()) {
        throw DataError("solar scenario produced a non-finite value");
      }
      bundle.solar.scenarios.push_back(std::move(scen));
    }
  }

  return bundle;
}

BandStatistics band_statistics(const ScenarioSet& set, double trim,
                               const Eigen::MatrixXd* actuals) {
  if (trim < 0.0 || trim >= 0.5) {
    throw ConfigError("trim fraction must lie in [0, 0.5)");
  }
  const int m = int(set.scenarios.size());
  if (m == 0) throw DataError("band statistics need at least one scenario");
  const int units = int(set.unit_ids.size());

  BandStatistics out;
  out.lower.resize(units, kLagsPerDay);
  out.upper.resize(units, kLagsPerDay);
  std::vector<double> cell(static_cast<size_t>(m));
  for (int u = 0; u < units; ++u) {
    for (int l = 0; l < kLagsPerDay; ++l) {
      for (int i = 0; i < m; ++i) cell[size_t(i)] = set.scenarios[size_t(i)](u, l);
      std::sort(cell.begin(), cell.end());
      out.lower(u, l) = sorted_quantile(cell, trim);
      out.upper(u, l) = sorted_quantile(cell, 1.0 - trim);
    }
  }

  if (actuals != nullptr) {
    if (actuals->rows() != units || actuals->cols() != kLagsPerDay) {
      throw DataError("actuals shape does not match the scenario set");
    }
    out.mape.reserve(size_t(m));
    for (int i = 0; i < m; ++i) {
      double total = 0.0;
      for (int u = 0; u < units; ++u) {
        for (int l = 0; l < kLagsPerDay; ++l) {
          const double a = (*actuals)(u, l);
          total += std::abs(set.scenarios[size_t(i)](u, l) - a) /
                   std::max(std::abs(a), 1.0);
        }
      }
      out.mape.push_back(total / double(units * kLagsPerDay));
    }
  }
  return out;
}

}  // namespace scengen
