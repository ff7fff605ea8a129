#include "scengen/serialize.hpp"

#include <cstdio>

#include "scengen/csv.hpp"
#include "scengen/errors.hpp"
#include "scengen/mathutil.hpp"

namespace scengen {

namespace {

using nlohmann::ordered_json;

constexpr const char* kFormat = "scengen-model/1";

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  if (!j.is_array()) throw DataError("model bundle: expected a matrix");
  const int rows = int(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const int cols = int(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (int(j[size_t(i)].size()) != cols) {
      throw DataError("model bundle: ragged matrix");
    }
    for (int c = 0; c < cols; ++c) {
      m(i, c) = j[size_t(i)][size_t(c)].get<double>();
    }
  }
  return m;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const ordered_json& j) {
  Eigen::VectorXd v(int(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j[size_t(i)].get<double>();
  return v;
}

ordered_json precision_to_json(const PrecisionEstimate& e) {
  return {{"theta", matrix_to_json(e.Theta)},
          {"sigma", matrix_to_json(e.Sigma)},
          {"objective", e.objective},
          {"converged", e.converged},
          {"notes", e.notes}};
}

PrecisionEstimate precision_from_json(const ordered_json& j) {
  PrecisionEstimate e;
  e.Theta = matrix_from_json(j.at("theta"));
  e.Sigma = matrix_from_json(j.at("sigma"));
  e.objective = j.at("objective").get<std::vector<double>>();
  e.converged = j.at("converged").get<bool>();
  e.notes = j.at("notes").get<std::vector<std::string>>();
  return e;
}

ordered_json separable_to_json(const SeparableGaussianModel& m) {
  return {{"spatial", precision_to_json(m.spatial)},
          {"temporal", precision_to_json(m.temporal)},
          {"unit_order", m.unit_order},
          {"lag_order", m.lag_order}};
}

SeparableGaussianModel separable_from_json(const ordered_json& j) {
  SeparableGaussianModel m;
  m.spatial = precision_from_json(j.at("spatial"));
  m.temporal = precision_from_json(j.at("temporal"));
  m.unit_order = j.at("unit_order").get<std::vector<std::string>>();
  m.lag_order = j.at("lag_order").get<std::vector<std::string>>();
  return m;
}

ordered_json tail_to_json(const GpdTail& t) {
  return {{"threshold", t.threshold},
          {"xi", t.xi},
          {"beta", t.beta},
          {"fraction", t.fraction}};
}

GpdTail tail_from_json(const ordered_json& j) {
  GpdTail t;
  t.threshold = j.at("threshold").get<double>();
  t.xi = j.at("xi").get<double>();
  t.beta = j.at("beta").get<double>();
  t.fraction = j.at("fraction").get<double>();
  return t;
}

ordered_json marginal_to_json(const Marginal& m) {
  if (const auto* e = std::get_if<EmpiricalModel>(&m)) {
    return {{"family", "empirical"},
            {"values", e->values},
            {"positions", e->positions},
            {"span", e->span},
            {"sample_size", e->sample_size}};
  }
  if (const auto* g = std::get_if<GpdTailModel>(&m)) {
    return {{"family", "gpd"},
            {"lower", tail_to_json(g->lower)},
            {"upper", tail_to_json(g->upper)},
            {"body_x", g->body_x},
            {"body_u", g->body_u},
            {"sample_size", g->sample_size}};
  }
  if (const auto* n = std::get_if<NormalModel>(&m)) {
    return {{"family", "normal"}, {"mean", n->mean}, {"sd", n->sd}};
  }
  const auto& c = std::get<ConstantModel>(m);
  return {{"family", "constant"}, {"value", c.value}};
}

Marginal marginal_from_json(const ordered_json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "empirical") {
    EmpiricalModel e;
    e.values = j.at("values").get<std::vector<double>>();
    e.positions = j.at("positions").get<std::vector<double>>();
    e.span = j.at("span").get<double>();
    e.sample_size = j.at("sample_size").get<std::size_t>();
    return e;
  }
  if (family == "gpd") {
    GpdTailModel g;
    g.lower = tail_from_json(j.at("lower"));
    g.upper = tail_from_json(j.at("upper"));
    g.body_x = j.at("body_x").get<std::vector<double>>();
    g.body_u = j.at("body_u").get<std::vector<double>>();
    g.sample_size = j.at("sample_size").get<std::size_t>();
    return g;
  }
  if (family == "normal") {
    NormalModel n;
    n.mean = j.at("mean").get<double>();
    n.sd = j.at("sd").get<double>();
    return n;
  }
  if (family == "constant") {
    return ConstantModel{j.at("value").get<double>()};
  }
  throw DataError("model bundle: unknown marginal family '" + family + "'");
}

ordered_json marginals_to_json(const std::vector<Marginal>& ms) {
  ordered_json a = ordered_json::array();
  for (const auto& m : ms) a.push_back(marginal_to_json(m));
  return a;
}

std::vector<Marginal> marginals_from_json(const ordered_json& j) {
  std::vector<Marginal> ms;
  ms.reserve(j.size());
  for (const auto& item : j) ms.push_back(marginal_from_json(item));
  return ms;
}

ordered_json bins_to_json(
    const std::vector<std::optional<BinnedConditionalModel>>& bins) {
  ordered_json a = ordered_json::array();
  for (const auto& b : bins) {
    if (!b) {
      a.push_back(nullptr);
      continue;
    }
    ordered_json models = ordered_json::array();
    for (const auto& e : b->bins) {
      models.push_back(marginal_to_json(Marginal{e}));
    }
    a.push_back(ordered_json{{"edges", b->edges}, {"bins", models}});
  }
  return a;
}

std::vector<std::optional<BinnedConditionalModel>> bins_from_json(
    const ordered_json& j) {
  std::vector<std::optional<BinnedConditionalModel>> out;
  out.reserve(j.size());
  for (const auto& item : j) {
    if (item.is_null()) {
      out.emplace_back(std::nullopt);
      continue;
    }
    BinnedConditionalModel b;
    b.edges = item.at("edges").get<std::vector<double>>();
    for (const auto& mj : item.at("bins")) {
      auto m = marginal_from_json(mj);
      auto* e = std::get_if<EmpiricalModel>(&m);
      if (e == nullptr) {
        throw DataError("model bundle: conditional bin is not empirical");
      }
      b.bins.push_back(std::move(*e));
    }
    out.emplace_back(std::move(b));
  }
  return out;
}

ordered_json catalog_to_json(const AssetCatalog& c) {
  ordered_json assets = ordered_json::array();
  for (const auto& a : c.assets) {
    assets.push_back({{"asset_id", a.asset_id},
                      {"quantity", a.quantity},
                      {"zone_id", a.zone_id},
                      {"latitude", a.latitude},
                      {"longitude", a.longitude},
                      {"capacity_mw", a.capacity_mw}});
  }
  return {{"zones", c.zones}, {"assets", std::move(assets)}};
}

AssetCatalog catalog_from_json(const ordered_json& j) {
  AssetCatalog c;
  c.zones = j.at("zones").get<std::vector<std::string>>();
  for (const auto& aj : j.at("assets")) {
    Asset a;
    a.asset_id = aj.at("asset_id").get<std::string>();
    a.quantity = aj.at("quantity").get<std::string>();
    a.zone_id = aj.at("zone_id").get<std::string>();
    a.latitude = aj.at("latitude").get<double>();
    a.longitude = aj.at("longitude").get<double>();
    a.capacity_mw = aj.at("capacity_mw").get<double>();
    c.assets.push_back(std::move(a));
  }
  return c;
}

ordered_json stats_to_json(const ColumnStats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}};
}

ColumnStats stats_from_json(const ordered_json& j) {
  ColumnStats s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.sd = j.at("sd").get<std::vector<double>>();
  return s;
}

ordered_json pca_to_json(const SolarPcaModel& m) {
  return {{"loadings", matrix_to_json(m.loadings)},
          {"explained", vector_to_json(m.explained)},
          {"center", vector_to_json(m.center)},
          {"k", m.k},
          {"component_mean", vector_to_json(m.component_mean)},
          {"component_sd", vector_to_json(m.component_sd)},
          {"separable", separable_to_json(m.separable)},
          {"warnings", m.warnings}};
}

SolarPcaModel pca_from_json(const ordered_json& j) {
  SolarPcaModel m;
  m.loadings = matrix_from_json(j.at("loadings"));
  m.explained = vector_from_json(j.at("explained"));
  m.center = vector_from_json(j.at("center"));
  m.k = j.at("k").get<int>();
  m.component_mean = vector_from_json(j.at("component_mean"));
  m.component_sd = vector_from_json(j.at("component_sd"));
  m.separable = separable_from_json(j.at("separable"));
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

std::vector<std::string> dates_to_strings(const std::vector<Date>& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(d.to_string());
  return out;
}

std::vector<Date> dates_from_strings(const std::vector<std::string>& ss) {
  std::vector<Date> out;
  out.reserve(ss.size());
  for (const auto& s : ss) out.push_back(Date::parse(s));
  return out;
}

std::string hash_hex(const std::string& payload) {
  const std::uint64_t h = fnv1a64(payload);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

ordered_json system_to_json(const FittedSystem& s) {
  ordered_json j;
  j["format"] = kFormat;
  j["catalog"] = catalog_to_json(s.catalog);
  j["window"] = {{"target_day", s.window.target_day.to_string()},
                 {"history_days", dates_to_strings(s.window.history_days)},
                 {"half_width", s.window.half_width},
                 {"in_sample", s.window.in_sample}};
  j["sunrise_lag"] = s.sunrise_lag;
  j["sunset_lag"] = s.sunset_lag;
  j["wind_units"] = s.wind_units;
  j["solar_units"] = s.solar_units;
  j["load_marginals"] = marginals_to_json(s.load_marginals);
  j["wind_marginals"] = marginals_to_json(s.wind_marginals);
  j["solar_marginals"] = marginals_to_json(s.solar_marginals);
  j["load_model"] = separable_to_json(s.load_model);
  j["wind_model"] = separable_to_json(s.wind_model);
  j["wind_bins"] = bins_to_json(s.wind_bins);
  j["solar_model"] = pca_to_json(s.solar_model);
  j["joint"] = precision_to_json(s.joint);
  j["joint_stats"] = stats_to_json(s.joint_stats);
  j["joint_labels"] = s.joint_labels;
  j["wind_independent"] = s.wind_independent;
  j["penalties"] = {{"load_spatial", s.penalties.load_spatial},
                    {"load_temporal", s.penalties.load_temporal},
                    {"wind_spatial", s.penalties.wind_spatial},
                    {"wind_temporal", s.penalties.wind_temporal},
                    {"solar_spatial", s.penalties.solar_spatial},
                    {"solar_component", s.penalties.solar_component},
                    {"joint", s.penalties.joint}};
  j["warnings"] = s.warnings;
  return j;
}

FittedSystem system_from_json(const ordered_json& j) {
  if (j.at("format").get<std::string>() != kFormat) {
    throw DataError("model bundle: unsupported format '" +
                    j.at("format").get<std::string>() + "'");
  }
  FittedSystem s;
  s.catalog = catalog_from_json(j.at("catalog"));
  const auto& w = j.at("window");
  s.window.target_day = Date::parse(w.at("target_day").get<std::string>());
  s.window.history_days =
      dates_from_strings(w.at("history_days").get<std::vector<std::string>>());
  s.window.half_width = w.at("half_width").get<int>();
  s.window.in_sample = w.at("in_sample").get<bool>();
  s.sunrise_lag = j.at("sunrise_lag").get<int>();
  s.sunset_lag = j.at("sunset_lag").get<int>();
  s.wind_units = j.at("wind_units").get<std::vector<std::string>>();
  s.solar_units = j.at("solar_units").get<std::vector<std::string>>();
  s.load_marginals = marginals_from_json(j.at("load_marginals"));
  s.wind_marginals = marginals_from_json(j.at("wind_marginals"));
  s.solar_marginals = marginals_from_json(j.at("solar_marginals"));
  s.load_model = separable_from_json(j.at("load_model"));
  s.wind_model = separable_from_json(j.at("wind_model"));
  s.wind_bins = bins_from_json(j.at("wind_bins"));
  s.solar_model = pca_from_json(j.at("solar_model"));
  s.joint = precision_from_json(j.at("joint"));
  s.joint_stats = stats_from_json(j.at("joint_stats"));
  s.joint_labels = j.at("joint_labels").get<std::vector<std::string>>();
  s.wind_independent = j.at("wind_independent").get<bool>();
  const auto& p = j.at("penalties");
  s.penalties.load_spatial = p.at("load_spatial").get<double>();
  s.penalties.load_temporal = p.at("load_temporal").get<double>();
  s.penalties.wind_spatial = p.at("wind_spatial").get<double>();
  s.penalties.wind_temporal = p.at("wind_temporal").get<double>();
  s.penalties.solar_spatial = p.at("solar_spatial").get<double>();
  s.penalties.solar_component = p.at("solar_component").get<double>();
  s.penalties.joint = p.at("joint").get<double>();
  s.warnings = j.at("warnings").get<std::vector<std::string>>();
  return s;
}

std::string model_hash(const FittedSystem& system) {
  return hash_hex(system_to_json(system).dump());
}

std::string save_system(const FittedSystem& system) {
  ordered_json j = system_to_json(system);
  const std::string payload = j.dump();
  ordered_json wrapped;
  wrapped["hash"] = hash_hex(payload);
  wrapped["model"] = std::move(j);
  return wrapped.dump(1);
}

FittedSystem load_system(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model bundle: ") + e.what());
  }
  try {
    const std::string stored = j.at("hash").get<std::string>();
    const ordered_json& model = j.at("model");
    if (hash_hex(model.dump()) != stored) {
      throw DataError("model bundle: content hash mismatch");
    }
    return system_from_json(model);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model bundle: ") + e.what());
  }
}

AssetCatalog read_catalog_csv(const std::string& path) {
  const auto table = read_csv(path);

  const std::vector<std::string> header = {"kind",     "id",
                                           "zone",     "latitude",
                                           "longitude", "capacity_mw"};
  if (table.front() != header) {
    throw DataError("catalog file '" + path + "' has an unexpected header");
  }

  AssetCatalog catalog;
  for (size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() != header.size()) {
      throw DataError("catalog row " + std::to_string(r + 1) +
                      " has the wrong number of fields");
    }
    const auto& kind = row[0];
    if (kind == "zone") {
      catalog.zones.push_back(row[1]);
      continue;
    }
    if (kind != "wind" && kind != "solar") {
      throw DataError("catalog row " + std::to_string(r + 1) +
                      ": unknown kind '" + kind + "'");
    }
    Asset a;
    a.asset_id = row[1];
    a.quantity = kind;
    a.zone_id = row[2];
    const std::string context = "catalog row " + std::to_string(r + 1);
    a.latitude = parse_double(row[3], context);
    a.longitude = parse_double(row[4], context);
    a.capacity_mw = parse_double(row[5], context);
    catalog.assets.push_back(std::move(a));
  }
  validate_catalog(catalog);
  return catalog;
}

std::string catalog_to_csv(const AssetCatalog& catalog) {
  std::string out = "kind,id,zone,latitude,longitude,capacity_mw\n";
  for (const auto& z : catalog.zones) {
    out += "zone," + z + ",,0,0,0\n";
  }
  for (const auto& a : catalog.assets) {
    out += a.quantity + "," + a.asset_id + "," + a.zone_id + "," +
           format_mw(a.latitude) + "," + format_mw(a.longitude) + "," +
           format_mw(a.capacity_mw) + "\n";
  }
  return out;
}

}  // namespace scengen
