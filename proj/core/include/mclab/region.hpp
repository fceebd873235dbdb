#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mclab/types.hpp"

namespace mclab {

// Flat per-agency fare rules. Distance bands, when present, replace the base
// fare by the price of the first band whose upper bound covers the ride.
struct fare_rule {
  double base{0.0};
  double transfer{0.0};
  std::int32_t transfer_window_sec{0};
  std::vector<std::pair<double, double>> distance_bands;  // (max_miles, price)

  friend bool operator==(fare_rule const&, fare_rule const&) = default;
};

struct region_config {
  // Closed intervals [start, end] in seconds after midnight.
  std::vector<std::pair<std::int32_t, std::int32_t>> rush_windows{
      {6 * 3600, 9 * 3600}, {16 * 3600, 19 * 3600}};
  std::set<std::string> cbd_zones;
  std::set<std::string> city_zones;
  double walk_threshold_miles{0.75};
  // Fallback fares keyed by agency, used when a feed carries no fare file.
  std::map<std::string, fare_rule> fares;

  bool in_rush(std::int32_t seconds_of_day) const;
  bool is_cbd(geo_point const& p) const;
  // Known zone not listed as city.
  bool is_suburb(geo_point const& p) const;
  bool is_city(geo_point const& p) const;
};

// Reads the JSON form: rush_windows, cbd_zones, city_zones,
// walk_threshold_miles and an optional fares object. Missing keys keep their
// defaults; malformed values throw config_error naming the key.
region_config region_config_from_json(nlohmann::json const& j);
nlohmann::json to_json(region_config const& cfg);
region_config load_region_config(std::string const& path);

struct context_flags {
  bool is_weekend{false};
  bool is_rush_hour{false};
  bool dest_cbd_rush{false};
  bool city_suburb_rush_in_tour{false};
  bool dest_within_walk{false};
  bool age_over_65{false};

  friend bool operator==(context_flags const&, context_flags const&) = default;
};

// Derives the context flags of one trip. `legs` are the tour's trips in tour
// order. Rush hour is judged at each leg's departure time. Throws
// consistency_error if the trip is not one of the tour's legs.
context_flags compute_context_flags(trip const& t, tour const& tr,
                                    std::span<trip const> legs,
                                    person const& p, region_config const& cfg);

}  // namespace mclab
