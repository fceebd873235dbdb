#include "mclab/altgen.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mclab/error.hpp"

namespace mclab {

namespace {

constexpr auto kNever = std::numeric_limits<std::int64_t>::max();
constexpr auto kZeroDistanceMiles = 1e-9;

double positive(nlohmann::json const& j, char const* key, double def) {
  if (!j.contains(key)) {
    return def;
  }
  auto const v = j.at(key).get<double>();
  if (!(v > 0.0)) {
    throw config_error{std::string{"altgen."} + key + ": must be positive"};
  }
  return v;
}

double non_negative(nlohmann::json const& j, char const* key, double def) {
  if (!j.contains(key)) {
    return def;
  }
  auto const v = j.at(key).get<double>();
  if (!(v >= 0.0)) {
    throw config_error{std::string{"altgen."} + key + ": must be >= 0"};
  }
  return v;
}

// Round-specific best arrival at a stop.
struct label {
  std::int64_t arrival{kNever};
  double access_mi{0.0};
  std::uint32_t board_event{0};
  std::uint32_t alight_event{0};
  std::int64_t service_base{0};  // absolute midnight of the trip's service day
  std::int32_t from_stop{-1};    // round 2: transfer stop
  std::uint32_t origin_stop{0};  // round 1 boarding stop

  bool improves_on(label const& o) const {
    return arrival < o.arrival ||
           (arrival == o.arrival && access_mi < o.access_mi);
  }
};

transit_leg make_leg(gtfs::feed const& f, label const& l) {
  auto const& board = f.stop_times[l.board_event];
  auto const& alight = f.stop_times[l.alight_event];
  auto const& bs = f.stops[board.stop];
  auto const& as = f.stops[alight.stop];
  return transit_leg{
      f.agency,
      f.routes[f.trips[board.trip].route].id,
      bs.id,
      as.id,
      time_stamp::from_absolute(l.service_base + board.departure),
      time_stamp::from_absolute(l.service_base + alight.arrival),
      haversine_miles(bs.pos, as.pos)};
}

fare_rule const& rule_for(std::string const& agency, feed_set const& feeds,
                          region_config const& region) {
  if (auto const it = feeds.find(agency); it != feeds.end() && it->second.fares) {
    return *it->second.fares;
  }
  if (auto const it = region.fares.find(agency); it != region.fares.end()) {
    return it->second;
  }
  throw config_error{"no fare rule for agency \"" + agency + "\""};
}

double leg_base_fare(fare_rule const& r, double ride_mi) {
  if (r.distance_bands.empty()) {
    return r.base;
  }
  for (auto const& [max_mi, price] : r.distance_bands) {
    if (ride_mi <= max_mi) {
      return price;
    }
  }
  return r.distance_bands.back().second;
}

alternative unavailable(mode m) { return alternative{m, false, 0, 0, 0, 0, 0}; }

nlohmann::json attrs_json(alternative const& a) {
  return {{"available", a.available},
          {"time_h", a.time_h},
          {"access_mi", a.access_mi},
          {"egress_mi", a.egress_mi},
          {"transfers", a.transfers},
          {"fare", a.fare}};
}

std::int64_t minute_from_iso(std::string const& iso) {
  // YYYY-MM-DDTHH:MM
  if (iso.size() != 16 || iso[10] != 'T' || iso[13] != ':') {
    throw schema_error{"routing cache: malformed depart_iso \"" + iso + "\""};
  }
  auto const d = parse_date(iso.substr(0, 10));
  auto const hh = std::stoi(iso.substr(11, 2));
  auto const mm = std::stoi(iso.substr(14, 2));
  return day_number(d) * 1440 + hh * 60 + mm;
}

}  // namespace

double altgen_config::walk_radius_for(std::string const& agency) const {
  auto const it = walk_radius_by_agency.find(agency);
  return it == walk_radius_by_agency.end() ? walk_access_radius_mi : it->second;
}

altgen_config altgen_config_from_json(nlohmann::json const& j) {
  altgen_config c;
  if (j.is_null()) {
    return c;
  }
  try {
    c.walk_speed_mph = positive(j, "walk_speed_mph", c.walk_speed_mph);
    c.bike_speed_mph = positive(j, "bike_speed_mph", c.bike_speed_mph);
    c.drive_speed_mph = positive(j, "drive_speed_mph", c.drive_speed_mph);
    c.detour_factor = positive(j, "detour_factor", c.detour_factor);
    c.gas_cost_per_mile = non_negative(j, "gas_cost_per_mile", c.gas_cost_per_mile);
    c.walk_access_radius_mi =
        non_negative(j, "walk_access_radius_mi", c.walk_access_radius_mi);
    c.drive_access_radius_mi =
        non_negative(j, "drive_access_radius_mi", c.drive_access_radius_mi);
    c.search_window_sec = static_cast<std::int32_t>(
        non_negative(j, "search_window_sec", c.search_window_sec));
    if (j.contains("walk_radius_by_agency")) {
      for (auto const& [agency, r] : j.at("walk_radius_by_agency").items()) {
        if (!(r.get<double>() >= 0.0)) {
          throw config_error{"altgen.walk_radius_by_agency." + agency +
                             ": must be >= 0"};
        }
        c.walk_radius_by_agency[agency] = r.get<double>();
      }
    }
    c.cta_agency = j.value("cta_agency", c.cta_agency);
    c.pace_agency = j.value("pace_agency", c.pace_agency);
    c.rail_agency = j.value("rail_agency", c.rail_agency);
  } catch (nlohmann::json::exception const& e) {
    throw config_error{std::string{"altgen: "} + e.what()};
  }
  if (c.detour_factor < 1.0) {
    throw config_error{"altgen.detour_factor: must be >= 1"};
  }
  return c;
}

nlohmann::json to_json(altgen_config const& c) {
  return {{"walk_speed_mph", c.walk_speed_mph},
          {"bike_speed_mph", c.bike_speed_mph},
          {"drive_speed_mph", c.drive_speed_mph},
          {"detour_factor", c.detour_factor},
          {"gas_cost_per_mile", c.gas_cost_per_mile},
          {"walk_access_radius_mi", c.walk_access_radius_mi},
          {"drive_access_radius_mi", c.drive_access_radius_mi},
          {"walk_radius_by_agency", c.walk_radius_by_agency},
          {"search_window_sec", c.search_window_sec},
          {"cta_agency", c.cta_agency},
          {"pace_agency", c.pace_agency},
          {"rail_agency", c.rail_agency}};
}

alternative route_street(mode m, geo_point const& o, geo_point const& d,
                         altgen_config const& cfg) {
  double speed = 0.0;
  switch (m) {
    case mode::walk: speed = cfg.walk_speed_mph; break;
    case mode::bike: speed = cfg.bike_speed_mph; break;
    case mode::drive: speed = cfg.drive_speed_mph; break;
    default:
      throw domain_error{"street router cannot route " +
                         std::string{name_of(m)}};
  }
  auto const miles = haversine_miles(o, d) * cfg.detour_factor;
  alternative a{m, true, miles / speed, 0.0, 0.0, 0, 0.0};
  if (m == mode::drive) {
    a.fare = miles * cfg.gas_cost_per_mile;
  }
  return a;
}

std::optional<transit_itinerary> route_transit(feed_set const& feeds,
                                               std::string const& agency,
                                               geo_point const& o,
                                               geo_point const& d,
                                               time_stamp depart,
                                               altgen_config const& cfg,
                                               access_class access) {
  auto const fit = feeds.find(agency);
  if (fit == feeds.end()) {
    throw config_error{"no feed configured for agency \"" + agency + "\""};
  }
  auto const& f = fit->second;

  auto const access_radius = access == access_class::walk
                                 ? cfg.walk_radius_for(agency)
                                 : cfg.drive_access_radius_mi;
  auto const boarding = gtfs::stops_within(f, o, access_radius);
  if (boarding.empty()) {
    return std::nullopt;
  }
  auto const alighting = gtfs::stops_within(f, d, cfg.walk_radius_for(agency));
  if (alighting.empty()) {
    return std::nullopt;
  }

  auto const depart_abs = depart.absolute();
  auto const window = static_cast<std::int64_t>(cfg.search_window_sec);
  auto const drive_hours = [&](double mi) {
    return mi * cfg.detour_factor / cfg.drive_speed_mph;
  };

  std::vector<label> round1(f.stops.size());
  std::vector<label> round2(f.stops.size());
  std::vector<std::uint32_t> reached;

  auto const ride = [&](std::vector<label>& labels, std::uint32_t board_event,
                        std::int64_t at, label proto,
                        std::vector<std::uint32_t>* touched) {
    auto const& st = f.stop_times[board_event];
    auto const [begin, end] = f.trip_range(st.trip);
    proto.board_event = board_event;
    proto.service_base = at - st.departure;
    for (auto k = board_event + 1; k < end; ++k) {
      auto const& next = f.stop_times[k];
      proto.arrival = proto.service_base + next.arrival;
      proto.alight_event = static_cast<std::uint32_t>(k);
      if (proto.improves_on(labels[next.stop])) {
        if (touched != nullptr && labels[next.stop].arrival == kNever) {
          touched->push_back(next.stop);
        }
        labels[next.stop] = proto;
      }
    }
    (void)begin;
  };

  // Round 1: direct rides from every boarding stop.
  for (auto const& b : boarding) {
    auto const ready =
        depart_abs + (access == access_class::drive
                          ? std::llround(drive_hours(b.distance_miles) * 3600.0)
                          : 0);
    label proto;
    proto.access_mi = b.distance_miles;
    proto.origin_stop = b.stop;
    gtfs::for_each_departure(f, b.stop, ready, ready + window,
                             [&](std::uint32_t ev, std::int64_t at) {
                               ride(round1, ev, at, proto, &reached);
                             });
  }

  // Round 2: one same-stop transfer.
  std::sort(reached.begin(), reached.end());
  for (auto const s : reached) {
    auto const& l1 = round1[s];
    auto const first_trip = f.stop_times[l1.board_event].trip;
    label proto;
    proto.access_mi = l1.access_mi;
    proto.from_stop = static_cast<std::int32_t>(s);
    proto.origin_stop = l1.origin_stop;
    gtfs::for_each_departure(
        f, s, l1.arrival, l1.arrival + window,
        [&](std::uint32_t ev, std::int64_t at) {
          if (f.stop_times[ev].trip != first_trip) {
            ride(round2, ev, at, proto, nullptr);
          }
        });
  }

  struct candidate {
    std::int64_t arrival;
    std::uint32_t transfers;
    double access_mi;
    double egress_mi;
    std::uint32_t stop;
  };
  std::optional<candidate> best;
  auto const consider = [&](candidate const& c) {
    auto const key = [](candidate const& x) {
      return std::tie(x.arrival, x.transfers, x.access_mi, x.egress_mi, x.stop);
    };
    if (!best || key(c) < key(*best)) {
      best = c;
    }
  };
  for (auto const& a : alighting) {
    if (round1[a.stop].arrival != kNever) {
      consider({round1[a.stop].arrival, 0, round1[a.stop].access_mi,
                a.distance_miles, a.stop});
    }
    if (round2[a.stop].arrival != kNever) {
      consider({round2[a.stop].arrival, 1, round2[a.stop].access_mi,
                a.distance_miles, a.stop});
    }
  }
  if (!best) {
    return std::nullopt;
  }

  transit_itinerary it;
  it.agency = agency;
  it.access_mi = best->access_mi;
  it.egress_mi = best->egress_mi;
  it.transfers = best->transfers;
  if (best->transfers == 0) {
    it.legs.push_back(make_leg(f, round1[best->stop]));
  } else {
    auto const& l2 = round2[best->stop];
    it.legs.push_back(make_leg(f, round1[static_cast<std::uint32_t>(l2.from_stop)]));
    it.legs.push_back(make_leg(f, l2));
  }
  it.total_time_h = static_cast<double>(best->arrival - depart_abs) / 3600.0;
  if (access == access_class::drive) {
    it.access_drive_time_h = drive_hours(it.access_mi);
    it.access_gas_cost = it.access_mi * cfg.detour_factor * cfg.gas_cost_per_mile;
  }
  return it;
}

double compute_fare(transit_itinerary const& itin, feed_set const& feeds,
                    region_config const& region) {
  auto total = 0.0;
  std::string block_agency;
  std::int64_t block_start = 0;
  auto block_paid = 0.0;
  for (auto i = 0U; i != itin.legs.size(); ++i) {
    auto const& leg = itin.legs[i];
    auto const& rule = rule_for(leg.agency, feeds, region);
    auto const base = leg_base_fare(rule, leg.ride_mi);
    auto const board = leg.board.absolute();
    auto const in_window = i != 0 && leg.agency == block_agency &&
                           board - block_start <= rule.transfer_window_sec;
    if (in_window) {
      // Transfer fare plus any distance-band upgrade.
      auto const upgrade = std::max(0.0, base - block_paid);
      total += rule.transfer + upgrade;
      block_paid += upgrade;
    } else {
      total += base;
      block_agency = leg.agency;
      block_start = board;
      block_paid = base;
    }
  }
  return total;
}

cache_key make_cache_key(geo_point const& o, geo_point const& d, mode m,
                         time_stamp depart) {
  return cache_key{o.lat, o.lon, d.lat, d.lon, m, (depart.absolute() + 30) / 60};
}

void routing_cache::insert(cache_key const& key, alternative const& attrs) {
  entries_.insert_or_assign(key, attrs);
}

std::optional<alternative> routing_cache::find(cache_key const& key) const {
  auto const it = entries_.find(key);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

routing_cache routing_cache::parse(std::string const& jsonl) {
  routing_cache cache;
  std::istringstream in{jsonl};
  std::string line;
  auto line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      auto const j = nlohmann::json::parse(line);
      auto const m = parse_mode_name(j.at("mode").get<std::string>());
      if (!m) {
        throw schema_error{"unknown mode"};
      }
      auto const& a = j.at("attrs");
      alternative alt;
      alt.m = *m;
      alt.available = a.value("available", true);
      alt.time_h = a.at("time_h").get<double>();
      alt.access_mi = a.value("access_mi", 0.0);
      alt.egress_mi = a.value("egress_mi", 0.0);
      alt.transfers = a.value("transfers", 0U);
      alt.fare = a.value("fare", 0.0);
      cache.insert(cache_key{j.at("o_lat").get<double>(),
                             j.at("o_lon").get<double>(),
                             j.at("d_lat").get<double>(),
                             j.at("d_lon").get<double>(), *m,
                             minute_from_iso(j.at("depart_iso").get<std::string>())},
                   alt);
    } catch (std::exception const& e) {
      throw schema_error{"routing cache line " + std::to_string(line_no) +
                         ": " + e.what()};
    }
  }
  return cache;
}

routing_cache routing_cache::load(std::string const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw io_error{"cannot open routing cache " + path};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string cache_line(geo_point const& o, geo_point const& d,
                       time_stamp depart, alternative const& a) {
  nlohmann::json j = {{"o_lat", o.lat},
                      {"o_lon", o.lon},
                      {"d_lat", d.lat},
                      {"d_lon", d.lon},
                      {"mode", name_of(a.m)},
                      {"depart_iso", depart.iso_minute()},
                      {"minute_rounded", true},
                      {"attrs", attrs_json(a)}};
  return j.dump();
}

std::string routing_cache::to_jsonl() const {
  std::string out;
  for (auto const& [k, a] : entries_) {
    auto const t = time_stamp::from_absolute(k.minute * 60);
    out += cache_line(geo_point{k.o_lat, k.o_lon, {}},
                      geo_point{k.d_lat, k.d_lon, {}}, t, a);
    out += '\n';
  }
  return out;
}

alternative_set generate_alternatives(trip const& t, feed_set const& feeds,
                                      routing_cache const* cache,
                                      altgen_config const& cfg,
                                      region_config const& region) {
  alternative_set out;
  auto const cached = [&](mode m) -> std::optional<alternative> {
    if (cache == nullptr) {
      return std::nullopt;
    }
    return cache->find(make_cache_key(t.origin, t.destination, m, t.depart));
  };
  auto const zero_distance =
      haversine_miles(t.origin, t.destination) <= kZeroDistanceMiles;

  for (auto const m : {mode::walk, mode::bike, mode::drive}) {
    auto const hit = cached(m);
    out[index_of(m)] = hit ? *hit : route_street(m, t.origin, t.destination, cfg);
  }
  if (auto const hit = cached(mode::passenger)) {
    out[index_of(mode::passenger)] = *hit;
  } else {
    out[index_of(mode::passenger)] = out[index_of(mode::drive)];
    out[index_of(mode::passenger)].m = mode::passenger;
  }

  auto const transit = [&](mode m, std::string const& agency,
                           access_class access) -> alternative {
    if (auto const hit = cached(m)) {
      return *hit;
    }
    if (zero_distance) {
      return unavailable(m);
    }
    auto const itin =
        route_transit(feeds, agency, t.origin, t.destination, t.depart, cfg, access);
    if (!itin) {
      return unavailable(m);
    }
    return alternative{m,
                       true,
                       itin->total_time_h,
                       itin->access_mi,
                       itin->egress_mi,
                       itin->transfers,
                       compute_fare(*itin, feeds, region) + itin->access_gas_cost};
  };
  out[index_of(mode::cta)] = transit(mode::cta, cfg.cta_agency, access_class::walk);
  out[index_of(mode::pace)] =
      transit(mode::pace, cfg.pace_agency, access_class::walk);
  out[index_of(mode::hrail_slow)] =
      transit(mode::hrail_slow, cfg.rail_agency, access_class::walk);
  out[index_of(mode::hrail_fast)] =
      transit(mode::hrail_fast, cfg.rail_agency, access_class::drive);
  return out;
}

}  // namespace mclab
