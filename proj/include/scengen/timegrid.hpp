#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace scengen {

// Calendar date on the naive local grid used throughout; no time zones,
// no leap seconds. Stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;
  Date(int year, unsigned month, unsigned day);

  // Parses "YYYY-MM-DD". Throws DataError on malformed input.
  static Date parse(std::string_view text);

  std::string to_string() const;

  int year() const;
  unsigned month() const;
  unsigned day() const;

  Date plus_days(int n) const { return Date(days_ + n); }
  int days_since_epoch() const { return days_; }

  // Same month/day in `target_year`; Feb-29 maps to Feb-28.
  Date anniversary(int target_year) const;

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  explicit Date(int days) : days_(days) {}
  int days_ = 0;
};

inline int operator-(const Date& a, const Date& b) {
  return a.days_since_epoch() - b.days_since_epoch();
}

// Hourly (or finer) timestamp: date plus minute-of-day.
struct Timestamp {
  Date date;
  int minute_of_day = 0;  // 0..1439

  int hour() const { return minute_of_day / 60; }
  int minute() const { return minute_of_day % 60; }

  // Parses "YYYY-MM-DDTHH:MM".
  static Timestamp parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

}  // namespace scengen
