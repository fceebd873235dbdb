#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mclab/geo.hpp"
#include "mclab/mode.hpp"
#include "mclab/time.hpp"

namespace mclab {

enum class household_id : std::uint64_t {};
enum class person_id : std::uint64_t {};
enum class trip_id : std::uint64_t {};
enum class tour_id : std::uint64_t {};

template <typename Id>
constexpr std::uint64_t to_int(Id id) {
  return static_cast<std::uint64_t>(id);
}

enum class purpose : std::uint8_t { work, shop, return_home, other };

std::string_view name_of(purpose p);
// Accepts Work, Shop, ReturnHome, Other (case-insensitive).
std::optional<purpose> parse_purpose(std::string_view s);

struct household {
  household_id id{};
  geo_point home;
  std::uint32_t n_members{1};
  std::uint32_t n_vehicles{0};
  double income{0.0};  // dollars per year

  friend bool operator==(household const&, household const&) = default;
};

struct person {
  person_id id{};
  household_id household{};
  double age{0.0};
  bool is_female{false};

  friend bool operator==(person const&, person const&) = default;
};

struct trip {
  trip_id id{};
  person_id person{};
  geo_point origin;
  geo_point destination;
  time_stamp depart;
  time_stamp arrive;
  raw_mode observed_mode{raw_mode::other};
  purpose trip_purpose{purpose::other};
  std::optional<tour_id> tour;
  std::optional<std::uint32_t> leg_index;

  friend bool operator==(trip const&, trip const&) = default;
};

struct tour {
  tour_id id{};
  person_id person{};
  std::vector<trip_id> trips;  // time ordered
  bool starts_at_home{false};
  bool returns_home{false};

  // Home to home and chained; only complete tours feed estimation.
  bool complete() const { return starts_at_home && returns_home; }

  friend bool operator==(tour const&, tour const&) = default;
};

}  // namespace mclab
