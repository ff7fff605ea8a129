#include "scengen/timegrid.hpp"

#include <cstdio>

#include "scengen/errors.hpp"

namespace scengen {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(int days) {
  return chr::year_month_day(chr::sys_days(chr::days(days)));
}

int from_ymd(int y, unsigned m, unsigned d) {
  chr::year_month_day ymd{chr::year(y), chr::month(m), chr::day(d)};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date " + std::to_string(y) + "-" +
                    std::to_string(m) + "-" + std::to_string(d));
  }
  return static_cast<int>(chr::sys_days(ymd).time_since_epoch().count());
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day)
    : days_(from_ymd(year, month, day)) {}

Date Date::parse(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  std::string buf(text);
  if (std::sscanf(buf.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
    throw DataError("cannot parse date '" + buf + "' (expected YYYY-MM-DD)");
  }
  return Date(y, m, d);
}

std::string Date::to_string() const {
  auto ymd = to_ymd(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int Date::year() const { return int(to_ymd(days_).year()); }
unsigned Date::month() const { return unsigned(to_ymd(days_).month()); }
unsigned Date::day() const { return unsigned(to_ymd(days_).day()); }

Date Date::anniversary(int target_year) const {
  auto ymd = to_ymd(days_);
  unsigned m = unsigned(ymd.month());
  unsigned d = unsigned(ymd.day());
  if (m == 2 && d == 29) {
    chr::year_month_day probe{chr::year(target_year), chr::month(2), chr::day(29)};
    if (!probe.ok()) d = 28;
  }
  return Date(target_year, m, d);
}

Timestamp Timestamp::parse(std::string_view text) {
  int y = 0, hh = 0, mm = 0;
  unsigned mo = 0, dd = 0;
  char tail = 0;
  std::string buf(text);
  if (std::sscanf(buf.c_str(), "%d-%u-%uT%d:%d%c", &y, &mo, &dd, &hh, &mm,
                  &tail) != 5 ||
      hh < 0 || hh > 23 || mm < 0 || mm > 59) {
    throw DataError("cannot parse timestamp '" + buf +
                    "' (expected YYYY-MM-DDTHH:MM)");
  }
  return Timestamp{Date(y, mo, dd), hh * 60 + mm};
}

std::string Timestamp::to_string() const {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d", date.to_string().c_str(),
                hour(), minute());
  return buf;
}

}  // namespace scengen
