#include "mclab/time.hpp"

#include <charconv>
#include <cstdio>

#include "mclab/error.hpp"

namespace mclab {

namespace {

int parse_digits(std::string_view s, std::string_view whole) {
  int v = 0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw domain_error{"malformed date/time \"" + std::string{whole} + "\""};
  }
  return v;
}

}  // namespace

date make_date(int y, unsigned m, unsigned d) {
  auto const ymd = date{std::chrono::year{y}, std::chrono::month{m},
                        std::chrono::day{d}};
  if (!ymd.ok()) {
    throw domain_error{"invalid calendar date " + std::to_string(y) + "-" +
                       std::to_string(m) + "-" + std::to_string(d)};
  }
  return ymd;
}

date parse_date(std::string_view s) {
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    return make_date(parse_digits(s.substr(0, 4), s),
                     static_cast<unsigned>(parse_digits(s.substr(5, 2), s)),
                     static_cast<unsigned>(parse_digits(s.substr(8, 2), s)));
  }
  if (s.size() == 8) {
    return make_date(parse_digits(s.substr(0, 4), s),
                     static_cast<unsigned>(parse_digits(s.substr(4, 2), s)),
                     static_cast<unsigned>(parse_digits(s.substr(6, 2), s)));
  }
  throw domain_error{"malformed date \"" + std::string{s} + "\""};
}

std::string format_iso_date(date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::string format_gtfs_date(date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::int64_t day_number(date d) {
  return std::chrono::sys_days{d}.time_since_epoch().count();
}

date date_from_day_number(std::int64_t n) {
  return date{std::chrono::sys_days{std::chrono::days{n}}};
}

unsigned iso_weekday_index(date d) {
  // weekday::iso_encoding(): Monday = 1 ... Sunday = 7
  return std::chrono::weekday{std::chrono::sys_days{d}}.iso_encoding() - 1;
}

bool is_weekend(date d) { return iso_weekday_index(d) >= 5; }

std::int32_t parse_hms(std::string_view s) {
  auto const c1 = s.find(':');
  auto const c2 = s.rfind(':');
  if (c1 == std::string_view::npos || c1 == c2) {
    throw domain_error{"malformed time \"" + std::string{s} + "\""};
  }
  auto const h = parse_digits(s.substr(0, c1), s);
  auto const m = parse_digits(s.substr(c1 + 1, c2 - c1 - 1), s);
  auto const sec = parse_digits(s.substr(c2 + 1), s);
  if (m > 59 || sec > 59 || h < 0) {
    throw domain_error{"malformed time \"" + std::string{s} + "\""};
  }
  return h * 3600 + m * 60 + sec;
}

std::string format_hms(std::int32_t seconds) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", seconds / 3600,
                (seconds / 60) % 60, seconds % 60);
  return buf;
}

time_stamp::time_stamp(date d, std::int32_t seconds)
    : date_{d}, seconds_{seconds} {
  if (!d.ok()) {
    throw domain_error{"invalid date in time stamp"};
  }
  if (seconds < 0 || seconds >= kMaxSecondsOfDay) {
    throw domain_error{"seconds of day out of range: " +
                       std::to_string(seconds)};
  }
}

time_stamp time_stamp::normalized() const {
  return from_absolute(absolute());
}

time_stamp time_stamp::from_absolute(std::int64_t abs_seconds) {
  auto day = abs_seconds / kSecondsPerDay;
  auto rem = abs_seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --day;
  }
  return time_stamp{date_from_day_number(day), static_cast<std::int32_t>(rem)};
}

std::string time_stamp::iso_minute() const {
  auto const minutes = (absolute() + 30) / 60;
  auto const t = from_absolute(minutes * 60);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", t.seconds() / 3600,
                (t.seconds() / 60) % 60);
  return format_iso_date(t.day()) + "T" + buf;
}

}  // namespace mclab
