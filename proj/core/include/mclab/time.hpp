#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mclab {

inline constexpr std::int32_t kSecondsPerDay = 86400;
// Service days may run past midnight; a time stamp's seconds field covers two
// calendar days.
inline constexpr std::int32_t kMaxSecondsOfDay = 2 * kSecondsPerDay;

using date = std::chrono::year_month_day;

date make_date(int y, unsigned m, unsigned d);

// "YYYY-MM-DD" (survey files) or "YYYYMMDD" (GTFS).
date parse_date(std::string_view s);
std::string format_iso_date(date d);
std::string format_gtfs_date(date d);

// Days since 1970-01-01.
std::int64_t day_number(date d);
date date_from_day_number(std::int64_t n);

// 0 = Monday ... 6 = Sunday.
unsigned iso_weekday_index(date d);
bool is_weekend(date d);

// "H:MM:SS" or "HH:MM:SS"; hours may exceed 23.
std::int32_t parse_hms(std::string_view s);
std::string format_hms(std::int32_t seconds);

// A calendar date plus seconds since that date's midnight.
class time_stamp {
public:
  time_stamp() = default;
  // Throws domain_error unless 0 <= seconds < kMaxSecondsOfDay.
  time_stamp(date d, std::int32_t seconds);

  date day() const { return date_; }
  std::int32_t seconds() const { return seconds_; }

  // Seconds since 1970-01-01 00:00, ignoring time zones.
  std::int64_t absolute() const {
    return day_number(date_) * kSecondsPerDay + seconds_;
  }

  // Same instant with seconds folded into [0, 86400).
  time_stamp normalized() const;

  static time_stamp from_absolute(std::int64_t abs_seconds);

  // "YYYY-MM-DDTHH:MM" of the normalized instant, minute rounded to nearest.
  std::string iso_minute() const;

  friend bool operator==(time_stamp const& a, time_stamp const& b) {
    return a.absolute() == b.absolute();
  }
  friend std::strong_ordering operator<=>(time_stamp const& a,
                                          time_stamp const& b) {
    return a.absolute() <=> b.absolute();
  }

private:
  date date_{std::chrono::year{1970}, std::chrono::month{1},
             std::chrono::day{1}};
  std::int32_t seconds_{0};
};

}  // namespace mclab
