#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cryptic {

using Timestamp = std::int64_t;  // epoch seconds

inline constexpr std::int64_t kSecondsPerDay = 86400;
// China Standard Time, no daylight saving.
inline constexpr std::int64_t kChinaUtcOffset = 8 * 3600;

/// Epoch seconds of local (UTC+8) midnight starting the given civil date.
inline Timestamp local_midnight(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date");
  }
  return sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay - kChinaUtcOffset;
}

/// Parses "YYYY-MM-DD" into local midnight.
inline Timestamp parse_local_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  auto digits = [&](std::size_t pos, std::size_t len) {
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
      }
      v = v * 10 + static_cast<unsigned>(text[i] - '0');
    }
    return v;
  };
  y = static_cast<int>(digits(0, 4));
  m = digits(5, 2);
  d = digits(8, 2);
  return local_midnight(y, m, d);
}

/// Local civil date of a timestamp.
inline std::chrono::year_month_day local_date(Timestamp ts) {
  using namespace std::chrono;
  const std::int64_t shifted = ts + kChinaUtcOffset;
  std::int64_t days_since_epoch = shifted / kSecondsPerDay;
  if (shifted % kSecondsPerDay < 0) {
    --days_since_epoch;
  }
  return year_month_day{sys_days{std::chrono::days{days_since_epoch}}};
}

inline std::string format_local_date(Timestamp ts) {
  const auto ymd = local_date(ts);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Months since year 0 in local time; used for month-bucket comparisons.
inline std::int64_t local_month_index(Timestamp ts) {
  const auto ymd = local_date(ts);
  return static_cast<std::int64_t>(static_cast<int>(ymd.year())) * 12 +
         static_cast<std::int64_t>(static_cast<unsigned>(ymd.month())) - 1;
}

/// Contiguous run of observation days, each spanning local midnight to midnight.
/// Day boundaries are computed once at construction.
class Calendar {
 public:
  Calendar() : Calendar(local_midnight(2019, 12, 1), 88) {}

  Calendar(Timestamp first_midnight, int n_days) : start_(first_midnight) {
    if (n_days <= 0) {
      throw std::invalid_argument("calendar needs at least one day");
    }
    boundaries_.reserve(static_cast<std::size_t>(n_days) + 1);
    for (int d = 0; d <= n_days; ++d) {
      boundaries_.push_back(first_midnight + d * kSecondsPerDay);
    }
  }

  static Calendar from_dates(std::string_view first_day, int n_days) {
    return Calendar(parse_local_date(first_day), n_days);
  }

  int size() const { return static_cast<int>(boundaries_.size()) - 1; }
  Timestamp start() const { return start_; }
  Timestamp end() const { return boundaries_.back(); }  // exclusive
  Timestamp day_start(int d) const { return boundaries_.at(static_cast<std::size_t>(d)); }
  /// Last second belonging to day d.
  Timestamp day_end(int d) const { return boundaries_.at(static_cast<std::size_t>(d) + 1) - 1; }
  bool contains(Timestamp ts) const { return ts >= start_ && ts < end(); }

  /// Day index of ts; values outside the window map below 0 or to >= size().
  int day_of(Timestamp ts) const {
    const std::int64_t off = ts - start_;
    std::int64_t d = off / kSecondsPerDay;
    if (off % kSecondsPerDay < 0) {
      --d;
    }
    if (d > std::numeric_limits<int>::max()) {
      return std::numeric_limits<int>::max();
    }
    if (d < std::numeric_limits<int>::min()) {
      return std::numeric_limits<int>::min();
    }
    return static_cast<int>(d);
  }

  std::string date_label(int d) const { return format_local_date(day_start(d)); }

  bool operator==(const Calendar& other) const { return boundaries_ == other.boundaries_; }

 private:
  Timestamp start_;
  std::vector<Timestamp> boundaries_;
};

}  // namespace cryptic
