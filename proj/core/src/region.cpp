#include "mclab/region.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mclab/error.hpp"

namespace mclab {

namespace {

std::int32_t seconds_of_day(time_stamp const& t) {
  return t.normalized().seconds();
}

template <typename T>
T get_as(nlohmann::json const& j, std::string const& key) {
  try {
    return j.at(key).get<T>();
  } catch (nlohmann::json::exception const& e) {
    throw config_error{"region." + key + ": " + e.what()};
  }
}

fare_rule fare_rule_from_json(nlohmann::json const& j, std::string const& path) {
  fare_rule r;
  try {
    r.base = j.at("base").get<double>();
    r.transfer = j.value("transfer", 0.0);
    r.transfer_window_sec = j.value("transfer_window_sec", 0);
    if (j.contains("distance_bands")) {
      for (auto const& band : j.at("distance_bands")) {
        r.distance_bands.emplace_back(band.at(0).get<double>(),
                                      band.at(1).get<double>());
      }
    }
  } catch (nlohmann::json::exception const& e) {
    throw config_error{path + ": " + e.what()};
  }
  if (r.base < 0.0 || r.transfer < 0.0 || r.transfer_window_sec < 0) {
    throw config_error{path + ": fares and windows must be non-negative"};
  }
  std::sort(r.distance_bands.begin(), r.distance_bands.end());
  return r;
}

}  // namespace

bool region_config::in_rush(std::int32_t s) const {
  s %= kSecondsPerDay;
  return std::any_of(rush_windows.begin(), rush_windows.end(),
                     [&](auto const& w) { return w.first <= s && s <= w.second; });
}

bool region_config::is_cbd(geo_point const& p) const {
  return p.zone.has_value() && cbd_zones.contains(*p.zone);
}

bool region_config::is_city(geo_point const& p) const {
  return p.zone.has_value() && city_zones.contains(*p.zone);
}

bool region_config::is_suburb(geo_point const& p) const {
  return p.zone.has_value() && !city_zones.contains(*p.zone);
}

region_config region_config_from_json(nlohmann::json const& j) {
  if (!j.is_object()) {
    throw config_error{"region: expected an object"};
  }
  region_config cfg;
  if (j.contains("rush_windows")) {
    cfg.rush_windows.clear();
    for (auto const& w : j.at("rush_windows")) {
      if (!w.is_array() || w.size() != 2) {
        throw config_error{"region.rush_windows: expected [start, end] pairs"};
      }
      auto const a = w[0].get<std::int32_t>();
      auto const b = w[1].get<std::int32_t>();
      if (a < 0 || b < a || b > kSecondsPerDay) {
        throw config_error{"region.rush_windows: bad window [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]"};
      }
      cfg.rush_windows.emplace_back(a, b);
    }
  }
  if (j.contains("cbd_zones")) {
    auto const v = get_as<std::vector<std::string>>(j, "cbd_zones");
    cfg.cbd_zones = {v.begin(), v.end()};
  }
  if (j.contains("city_zones")) {
    auto const v = get_as<std::vector<std::string>>(j, "city_zones");
    cfg.city_zones = {v.begin(), v.end()};
  }
  if (j.contains("walk_threshold_miles")) {
    cfg.walk_threshold_miles = get_as<double>(j, "walk_threshold_miles");
    if (!(cfg.walk_threshold_miles >= 0.0)) {
      throw config_error{"region.walk_threshold_miles: must be >= 0"};
    }
  }
  if (j.contains("fares")) {
    for (auto const& [agency, rule] : j.at("fares").items()) {
      cfg.fares[agency] = fare_rule_from_json(rule, "region.fares." + agency);
    }
  }
  return cfg;
}

nlohmann::json to_json(region_config const& cfg) {
  auto j = nlohmann::json::object();
  auto windows = nlohmann::json::array();
  for (auto const& [a, b] : cfg.rush_windows) {
    windows.push_back({a, b});
  }
  j["rush_windows"] = windows;
  j["cbd_zones"] = cfg.cbd_zones;
  j["city_zones"] = cfg.city_zones;
  j["walk_threshold_miles"] = cfg.walk_threshold_miles;
  auto fares = nlohmann::json::object();
  for (auto const& [agency, r] : cfg.fares) {
    auto bands = nlohmann::json::array();
    for (auto const& [mi, price] : r.distance_bands) {
      bands.push_back({mi, price});
    }
    fares[agency] = {{"base", r.base},
                     {"transfer", r.transfer},
                     {"transfer_window_sec", r.transfer_window_sec},
                     {"distance_bands", bands}};
  }
  j["fares"] = fares;
  return j;
}

region_config load_region_config(std::string const& path) {
  std::ifstream in{path};
  if (!in) {
    throw io_error{"cannot open region config " + path};
  }
  try {
    return region_config_from_json(nlohmann::json::parse(in));
  } catch (nlohmann::json::parse_error const& e) {
    throw config_error{path + ": " + e.what()};
  }
}

context_flags compute_context_flags(trip const& t, tour const& tr,
                                    std::span<trip const> legs,
                                    person const& p,
                                    region_config const& cfg) {
  if (legs.size() != tr.trips.size()) {
    throw consistency_error{"tour " + std::to_string(to_int(tr.id)) +
                            ": leg list does not match the tour"};
  }
  auto in_tour = false;
  for (auto i = 0U; i != legs.size(); ++i) {
    if (legs[i].id != tr.trips[i]) {
      throw consistency_error{"tour " + std::to_string(to_int(tr.id)) +
                              ": leg list does not match the tour"};
    }
    in_tour = in_tour || legs[i].id == t.id;
  }
  if (!in_tour) {
    throw consistency_error{"trip " + std::to_string(to_int(t.id)) +
                            " is not a leg of tour " +
                            std::to_string(to_int(tr.id))};
  }

  context_flags f;
  auto const dep = t.depart.normalized();
  f.is_weekend = is_weekend(dep.day());
  f.is_rush_hour = cfg.in_rush(dep.seconds());
  for (auto const& leg : legs) {
    auto const rush = cfg.in_rush(seconds_of_day(leg.depart));
    if (!rush) {
      continue;
    }
    f.dest_cbd_rush = f.dest_cbd_rush || cfg.is_cbd(leg.destination);
    auto const crosses =
        (cfg.is_city(leg.origin) && cfg.is_suburb(leg.destination)) ||
        (cfg.is_suburb(leg.origin) && cfg.is_city(leg.destination));
    f.city_suburb_rush_in_tour = f.city_suburb_rush_in_tour || crosses;
  }
  f.dest_within_walk =
      haversine_miles(t.origin, t.destination) <= cfg.walk_threshold_miles;
  f.age_over_65 = p.age > 65.0;
  return f;
}

}  // namespace mclab
