#include "scengen/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <utility>

#include "scengen/csv.hpp"
#include "scengen/errors.hpp"

namespace scengen {

std::vector<double> DeviationPanel::deviation_series(int unit, int lag) const {
  const int r = row(unit, lag);
  std::vector<double> out(day_count());
  for (int d = 0; d < day_count(); ++d) out[d] = deviations(r, d);
  return out;
}

DeviationPanel DeviationPanel::subset_days(const std::vector<Date>& keep) const {
  std::unordered_map<int, int> day_col;
  day_col.reserve(days.size());
  for (int d = 0; d < day_count(); ++d) day_col[days[d].days_since_epoch()] = d;

  DeviationPanel out;
  out.units = units;
  out.days = keep;
  out.deviations.resize(deviations.rows(), static_cast<Eigen::Index>(keep.size()));
  out.forecasts.resize(forecasts.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto it = day_col.find(keep[i].days_since_epoch());
    if (it == day_col.end()) {
      throw DataError("day " + keep[i].to_string() + " not present in panel");
    }
    out.deviations.col(static_cast<Eigen::Index>(i)) = deviations.col(it->second);
    out.forecasts.col(static_cast<Eigen::Index>(i)) = forecasts.col(it->second);
  }
  return out;
}

std::vector<SeriesRecord> resample_hourly(const std::vector<SeriesRecord>& records) {
  // Group by unit, preserving first-appearance order.
  std::vector<std::string> unit_order;
  std::unordered_map<std::string, std::vector<const SeriesRecord*>> by_unit;
  for (const auto& r : records) {
    auto [it, inserted] = by_unit.try_emplace(r.unit_id);
    if (inserted) unit_order.push_back(r.unit_id);
    it->second.push_back(&r);
  }

  std::vector<SeriesRecord> out;
  out.reserve(records.size() / 2 + 1);
  for (const auto& unit : unit_order) {
    const auto& recs = by_unit[unit];
    for (std::size_t i = 1; i < recs.size(); ++i) {
      if (recs[i]->when <= recs[i - 1]->when) {
        throw DataError("unit '" + unit + "': timestamps not strictly increasing at " +
                        recs[i]->when.to_string() +
                        " (duplicated/DST hours are rejected)");
      }
    }
    std::size_t i = 0;
    long long prev_hour_index = -1;
    while (i < recs.size()) {
      const Date date = recs[i]->when.date;
      const int hour = recs[i]->when.hour();
      const long long hour_index = 24ll * date.days_since_epoch() + hour;
      if (prev_hour_index >= 0 && hour_index != prev_hour_index + 1) {
        const long long missing = prev_hour_index + 1;
        const Date missing_day =
            date.plus_days(static_cast<int>(missing / 24 - hour_index / 24));
        throw EmptyHourError("unit '" + unit + "': no samples for hour " +
                             std::to_string(missing % 24) + " of " +
                             missing_day.to_string() + " (gap before " +
                             recs[i]->when.to_string() + ")");
      }
      double sum = 0.0;
      int count = 0;
      while (i < recs.size() && recs[i]->when.date == date &&
             recs[i]->when.hour() == hour) {
        sum += recs[i]->value;
        ++count;
        ++i;
      }
      out.push_back(SeriesRecord{unit, Timestamp{date, hour * 60}, sum / count});
      prev_hour_index = hour_index;
    }
  }
  return out;
}

namespace {

// (unit index, day, lag) -> value lookup built from hourly records.
struct HourlyIndex {
  std::unordered_map<std::string, int> unit_index;
  // key: unit * (large day span) handled via map from (unit, day epoch) to 24 values
  std::unordered_map<long long, std::array<double, kLagsPerDay>> cells;
  std::unordered_map<long long, int> cell_counts;
  std::set<Date> days;

  static long long key(int unit, int day_epoch) {
    return (static_cast<long long>(unit) << 32) ^ (day_epoch & 0xffffffffll);
  }
};

HourlyIndex build_index(const std::vector<SeriesRecord>& records,
                        const std::vector<std::string>& units,
                        const std::string& source_name) {
  HourlyIndex idx;
  for (std::size_t u = 0; u < units.size(); ++u) idx.unit_index[units[u]] = int(u);
  for (const auto& r : records) {
    const auto it = idx.unit_index.find(r.unit_id);
    if (it == idx.unit_index.end()) continue;  // unrequested unit
    if (r.when.minute() != 0) {
      throw DataError(source_name + ": record at " + r.when.to_string() +
                      " is not hourly; resample first");
    }
    const long long k = HourlyIndex::key(it->second, r.when.date.days_since_epoch());
    auto [cell, inserted] = idx.cells.try_emplace(k);
    if (inserted) cell->second.fill(std::numeric_limits<double>::quiet_NaN());
    double& slot = cell->second[r.when.hour()];
    if (!std::isnan(slot)) {
      throw DataError(source_name + ": duplicate hour " + r.when.to_string() +
                      " for unit '" + r.unit_id + "'");
    }
    slot = r.value;
    ++idx.cell_counts[k];
    idx.days.insert(r.when.date);
  }
  return idx;
}

}  // namespace

PanelBuildResult compute_deviations(const std::vector<SeriesRecord>& actuals,
                                    const std::vector<SeriesRecord>& forecasts,
                                    const std::vector<std::string>& units) {
  // Units must exist in both sources.
  for (const auto& source :
       {std::pair{&actuals, "actuals"}, std::pair{&forecasts, "forecasts"}}) {
    std::set<std::string> seen;
    for (const auto& r : *source.first) seen.insert(r.unit_id);
    for (const auto& u : units) {
      if (!seen.count(u)) {
        throw UnitMismatchError("unit '" + u + "' absent from " + source.second);
      }
    }
  }

  const HourlyIndex actual_idx = build_index(actuals, units, "actuals");
  const HourlyIndex forecast_idx = build_index(forecasts, units, "forecasts");

  std::set<Date> candidate_days;
  for (const Date& d : actual_idx.days) {
    if (forecast_idx.days.count(d)) candidate_days.insert(d);
  }

  const int p = static_cast<int>(units.size());
  PanelBuildResult result;
  std::vector<Date> complete_days;
  for (const Date& d : candidate_days) {
    bool complete = true;
    for (int u = 0; u < p && complete; ++u) {
      const long long k = HourlyIndex::key(u, d.days_since_epoch());
      const auto a = actual_idx.cell_counts.find(k);
      const auto f = forecast_idx.cell_counts.find(k);
      complete = a != actual_idx.cell_counts.end() && a->second == kLagsPerDay &&
                 f != forecast_idx.cell_counts.end() && f->second == kLagsPerDay;
    }
    if (complete) {
      complete_days.push_back(d);
    } else {
      result.dropped_days.push_back(d);
    }
  }
  // Days seen in only one source are also incomplete.
  for (const Date& d : actual_idx.days) {
    if (!forecast_idx.days.count(d)) result.dropped_days.push_back(d);
  }
  for (const Date& d : forecast_idx.days) {
    if (!actual_idx.days.count(d)) result.dropped_days.push_back(d);
  }
  std::sort(result.dropped_days.begin(), result.dropped_days.end());

  if (complete_days.empty()) {
    throw NoOverlapError("no complete day shared by actuals and forecasts");
  }

  DeviationPanel& panel = result.panel;
  panel.units = units;
  panel.days = complete_days;
  const int n_days = static_cast<int>(complete_days.size());
  panel.deviations.resize(p * kLagsPerDay, n_days);
  panel.forecasts.resize(p * kLagsPerDay, n_days);
  for (int d = 0; d < n_days; ++d) {
    for (int u = 0; u < p; ++u) {
      const long long k = HourlyIndex::key(u, complete_days[d].days_since_epoch());
      const auto& av = actual_idx.cells.at(k);
      const auto& fv = forecast_idx.cells.at(k);
      for (int lag = 0; lag < kLagsPerDay; ++lag) {
        panel.forecasts(panel.row(u, lag), d) = fv[lag];
        panel.deviations(panel.row(u, lag), d) = av[lag] - fv[lag];
      }
    }
  }
  return result;
}

DayWindow select_history(const Date& target_day, const std::set<Date>& available_days,
                         int n, int min_days) {
  if (n < 1) throw ConfigError("window half-width n must be >= 1");

  const int target_year = target_day.year();
  std::set<Date> chosen;

  // The n days preceding the target inside the target year.
  for (int i = 1; i <= n; ++i) {
    const Date d = target_day.plus_days(-i);
    if (d.year() != target_year) break;
    if (available_days.count(d)) chosen.insert(d);
  }

  // Prior-year days inside the 2n+1 window centered on the anniversary.
  const Date anniversary = target_day.anniversary(target_year - 1);
  bool prior_year_has_data = false;
  for (int off = -n; off <= n; ++off) {
    const Date d = anniversary.plus_days(off);
    if (d.year() != target_year - 1) continue;
    if (available_days.count(d)) {
      chosen.insert(d);
      prior_year_has_data = true;
    }
  }

  DayWindow window;
  window.target_day = target_day;
  window.half_width = n;

  if (static_cast<int>(chosen.size()) < min_days && !prior_year_has_data) {
    // In-sample fallback: a window covering the target, extending n days into
    // the future, excluding the target itself.
    chosen.clear();
    for (int off = -n; off <= n; ++off) {
      if (off == 0) continue;
      const Date d = target_day.plus_days(off);
      if (available_days.count(d)) chosen.insert(d);
    }
    window.in_sample = true;
  }

  if (static_cast<int>(chosen.size()) < min_days) {
    throw InsufficientHistoryError(
        "only " + std::to_string(chosen.size()) + " history days available for " +
        target_day.to_string() + " (minimum " + std::to_string(min_days) + ")");
  }
  window.history_days.assign(chosen.begin(), chosen.end());
  return window;
}

std::vector<SeriesRecord> read_series_csv(const std::string& path) {
  const auto rows = read_csv(path);
  const auto& header = rows.front();
  if (header.size() != 3 || header[0] != "unit_id" || header[1] != "timestamp" ||
      header[2] != "value") {
    throw DataError("'" + path + "': expected header unit_id,timestamp,value");
  }
  std::vector<SeriesRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) {
      throw DataError("'" + path + "' line " + std::to_string(i + 1) +
                      ": expected 3 fields");
    }
    out.push_back(SeriesRecord{row[0], Timestamp::parse(row[1]),
                               parse_double(row[2], path)});
  }
  return out;
}

std::map<std::string, double> read_capacity_csv(const std::string& path) {
  const auto rows = read_csv(path);
  const auto& header = rows.front();
  if (header.size() != 2 || header[0] != "unit_id" || header[1] != "capacity_mw") {
    throw DataError("'" + path + "': expected header unit_id,capacity_mw");
  }
  std::map<std::string, double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    out[rows[i][0]] = parse_double(rows[i][1], path);
  }
  return out;
}

void validate_capacity(const std::vector<SeriesRecord>& records,
                       const std::map<std::string, double>& capacity,
                       double tolerance_mw) {
  for (const auto& r : records) {
    const auto it = capacity.find(r.unit_id);
    if (it == capacity.end()) continue;
    if (r.value < -tolerance_mw || r.value > it->second + tolerance_mw) {
      throw DataError("unit '" + r.unit_id + "' at " + r.when.to_string() +
                      ": value " + std::to_string(r.value) +
                      " outside [0, " + std::to_string(it->second) + "]");
    }
  }
}

}  // namespace scengen
