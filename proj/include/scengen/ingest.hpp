#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scengen/timegrid.hpp"

namespace scengen {

constexpr int kLagsPerDay = 24;

// One (unit, timestamp, MW) observation.
struct SeriesRecord {
  std::string unit_id;
  Timestamp when;
  double value = 0.0;
};

// Per-series deviations (actual - forecast) arranged as (unit, lag, day).
// Row index is unit * 24 + lag; one column per day. Forecasts are retained
// for scenario reconstruction.
struct DeviationPanel {
  std::vector<std::string> units;
  std::vector<Date> days;
  Eigen::MatrixXd deviations;  // (units*24) x days
  Eigen::MatrixXd forecasts;   // same shape

  int unit_count() const { return static_cast<int>(units.size()); }
  int day_count() const { return static_cast<int>(days.size()); }
  int row(int unit, int lag) const { return unit * kLagsPerDay + lag; }

  double deviation(int unit, int lag, int day) const {
    return deviations(row(unit, lag), day);
  }
  double forecast(int unit, int lag, int day) const {
    return forecasts(row(unit, lag), day);
  }

  // One (unit, lag) series across days.
  std::vector<double> deviation_series(int unit, int lag) const;

  // Panel restricted to the given days (which must all be present).
  DeviationPanel subset_days(const std::vector<Date>& keep) const;
};

// Historical window used to fit the model for one target day.
struct DayWindow {
  Date target_day;
  std::vector<Date> history_days;  // sorted ascending
  int half_width = 50;             // n
  bool in_sample = false;
};

// Hourly averaging of sub-hourly records. Records must be sorted by
// timestamp within each unit; already-hourly data passes through unchanged.
// Throws EmptyHourError on an interior hour with no samples and DataError on
// duplicated timestamps (DST-style duplication is rejected).
std::vector<SeriesRecord> resample_hourly(const std::vector<SeriesRecord>& records);

struct PanelBuildResult {
  DeviationPanel panel;
  std::vector<Date> dropped_days;  // days with at least one missing cell
};

// Builds the deviation panel for `units` from hourly actuals and forecasts.
// Days missing any (unit, lag) cell in either source are dropped and
// reported. Throws UnitMismatchError / NoOverlapError.
PanelBuildResult compute_deviations(const std::vector<SeriesRecord>& actuals,
                                    const std::vector<SeriesRecord>& forecasts,
                                    const std::vector<std::string>& units);

// Selects the non-anticipative history window for `target_day`: the n
// preceding days of the target year plus the prior-year days inside the
// 2n+1 window centered on the anniversary. Falls back to the in-sample
// window [target-n, target+n] \ {target} when the prior year is empty and
// the union is short. Throws InsufficientHistoryError.
DayWindow select_history(const Date& target_day, const std::set<Date>& available_days,
                         int n, int min_days = 60);

// --- CSV loading ----------------------------------------------------------

// Reads `unit_id,timestamp,value` rows; timestamps formatted
// YYYY-MM-DDTHH:MM. Values must be finite.
std::vector<SeriesRecord> read_series_csv(const std::string& path);

// Optional `unit_id,capacity_mw` sidecar.
std::map<std::string, double> read_capacity_csv(const std::string& path);

// Checks wind/solar actuals against [0, capacity] where capacity is known.
void validate_capacity(const std::vector<SeriesRecord>& records,
                       const std::map<std::string, double>& capacity,
                       double tolerance_mw = 1e-6);

}  // namespace scengen
