#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mclab/choiceset.hpp"
#include "mclab/csv.hpp"
#include "mclab/error.hpp"
#include "mclab/gtfs.hpp"
#include "mclab/pipeline.hpp"
#include "mclab/survey.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mclab {

namespace {

// Synthetic city on a 24 x 24 mile square around downtown Chicago.
constexpr double kCenterLat = 41.8781;
constexpr double kCenterLon = -87.6298;
constexpr double kMilesPerDegLat = 69.05;
constexpr double kHalfWidth = 12.0;
constexpr double kZoneSize = 3.0;
constexpr int kZonesPerSide = 8;
constexpr double kCityHalfWidth = 6.0;

struct xy {
  double x;
  double y;
};

std::string zone_at(xy p) {
  auto const idx = [](double v) {
    return std::clamp(static_cast<int>(std::floor((v + kHalfWidth) / kZoneSize)),
                      0, kZonesPerSide - 1);
  };
  return "Z" + std::to_string(idx(p.x)) + "_" + std::to_string(idx(p.y));
}

geo_point to_point(xy p) {
  auto const lat = kCenterLat + p.y / kMilesPerDegLat;
  auto const lon =
      kCenterLon +
      p.x / (kMilesPerDegLat * std::cos(kCenterLat * 3.14159265358979323846 / 180.0));
  // round to 1e-6 degrees so the survey files carry short literals
  auto const r = [](double v) { return std::round(v * 1e6) / 1e6; };
  return geo_point{r(lat), r(lon), zone_at(p)};
}

double dist(xy a, xy b) { return std::hypot(a.x - b.x, a.y - b.y); }

class rng {
public:
  explicit rng(std::uint64_t seed) : gen_{mix64(seed)} {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  template <std::size_t N>
  std::size_t pick(std::array<double, N> const& w) {
    auto u = uniform();
    for (auto i = std::size_t{0}; i != N; ++i) {
      if (u < w[i]) {
        return i;
      }
      u -= w[i];
    }
    return N - 1;
  }

private:
  std::mt19937_64 gen_;
};

// ---- feeds -------------------------------------------------------------------

class feed_builder {
public:
  explicit feed_builder(std::string agency) { f_.agency = std::move(agency); }

  std::uint32_t stop(std::string const& id, xy p) {
    auto const it = stops_.find(id);
    if (it != stops_.end()) {
      return it->second;
    }
    auto const idx = static_cast<std::uint32_t>(f_.stops.size());
    f_.stops.push_back({id, id, to_point(p)});
    pos_.push_back(p);
    stops_[id] = idx;
    return idx;
  }

  std::uint32_t service(std::string const& id, std::string_view mask, date start,
                        date end) {
    gtfs::service s;
    s.id = id;
    for (auto d = 0U; d != 7; ++d) {
      s.weekdays.set(d, mask[d] == '1');
    }
    s.start = start;
    s.end = end;
    f_.services.push_back(s);
    return static_cast<std::uint32_t>(f_.services.size() - 1);
  }

  // Trips every `headway` seconds from `first` to `last` along the stop
  // sequence at constant speed.
  void line(std::string const& route_id, int type,
            std::vector<std::uint32_t> const& seq, std::uint32_t service,
            std::int32_t first, std::int32_t last, std::int32_t headway,
            double mph) {
    auto const route = static_cast<std::uint32_t>(f_.routes.size());
    f_.routes.push_back({route_id, type});
    for (auto start = first; start <= last; start += headway) {
      auto const trip = static_cast<std::uint32_t>(f_.trips.size());
      f_.trips.push_back({route_id + "_" + f_.services[service].id + "_" +
                              std::to_string(start),
                          route, service});
      auto t = static_cast<double>(start);
      for (auto k = std::size_t{0}; k != seq.size(); ++k) {
        if (k != 0) {
          t += dist(pos_[seq[k - 1]], pos_[seq[k]]) / mph * 3600.0;
        }
        auto const s = static_cast<std::int32_t>(std::lround(t));
        f_.stop_times.push_back(
            {trip, seq[k], s, s, static_cast<std::uint32_t>(k + 1)});
      }
    }
  }

  gtfs::feed& feed() { return f_; }

private:
  gtfs::feed f_;
  std::map<std::string, std::uint32_t> stops_;
  std::vector<xy> pos_;
};

std::string half_mile_id(char prefix, double x, double y) {
  return std::string{prefix} + "_" + std::to_string(std::lround(x * 2)) + "_" +
         std::to_string(std::lround(y * 2));
}

fare_rule cta_fares() { return {2.25, 0.25, 7200, {}}; }
fare_rule pace_fares() { return {1.75, 0.25, 7200, {}}; }
fare_rule metra_fares() {
  return {2.75, 0.0, 0, {{5.0, 2.75}, {10.0, 3.75}, {100.0, 4.75}}};
}

void build_feeds(fs::path const& dir, date start, date end) {
  constexpr std::string_view kDaily = "1111111";
  constexpr std::string_view kWeekday = "1111100";
  constexpr std::string_view kWeekend = "0000011";

  // CTA: bus grid over the city, lines every 2 miles, stops every half mile.
  {
    feed_builder b{"CTA"};
    auto const svc = b.service("daily", kDaily, start, end);
    for (auto g = -6; g <= 6; g += 2) {
      for (auto const vertical : {false, true}) {
        std::vector<std::uint32_t> seq;
        for (auto k = -12; k <= 12; ++k) {
          auto const along = k * 0.5;
          auto const p = vertical ? xy{double(g), along} : xy{along, double(g)};
          seq.push_back(b.stop(half_mile_id('c', p.x, p.y), p));
        }
        auto const id = std::string{vertical ? "NS" : "EW"} + std::to_string(g);
        b.line(id + "a", 3, seq, svc, 5 * 3600, 23 * 3600 + 1800, 720, 12.0);
        std::reverse(seq.begin(), seq.end());
        b.line(id + "b", 3, seq, svc, 5 * 3600 + 360, 23 * 3600 + 1800, 720, 12.0);
      }
    }
    b.feed().fares = cta_fares();
    gtfs::write_feed(b.feed(), (dir / "cta").string());
  }

  // Pace: four suburban lines at +-9 miles, weekdays only.
  {
    feed_builder b{"Pace"};
    auto const svc = b.service("weekday", kWeekday, start, end);
    for (auto const g : {-9, 9}) {
      for (auto const vertical : {false, true}) {
        std::vector<std::uint32_t> seq;
        for (auto k = -12; k <= 12; ++k) {
          auto const p = vertical ? xy{double(g), double(k)} : xy{double(k), double(g)};
          seq.push_back(b.stop(half_mile_id('p', p.x, p.y), p));
        }
        auto const id = std::string{vertical ? "NS" : "EW"} + std::to_string(g);
        b.line(id + "a", 3, seq, svc, 6 * 3600, 21 * 3600, 1800, 15.0);
        std::reverse(seq.begin(), seq.end());
        b.line(id + "b", 3, seq, svc, 6 * 3600 + 900, 21 * 3600, 1800, 15.0);
      }
    }
    b.feed().fares = pace_fares();
    gtfs::write_feed(b.feed(), (dir / "pace").string());
  }

  // Metra: four radial lines from the downtown terminal, stations every
  // 2 miles; hourly on weekdays, every two hours at weekends.
  {
    feed_builder b{"Metra"};
    auto const wk = b.service("weekday", kWeekday, start, end);
    auto const we = b.service("weekend", kWeekend, start, end);
    std::array<xy, 4> const dirs{xy{0, 1}, xy{-1, 0}, xy{0, -1},
                                 xy{-0.7071067811865476, 0.7071067811865476}};
    std::array<char const*, 4> const names{"North", "West", "South", "Northwest"};
    for (auto i = 0; i != 4; ++i) {
      std::vector<std::uint32_t> seq;
      for (auto k = 0; k <= 6; ++k) {
        xy const p{dirs[i].x * 2.0 * k, dirs[i].y * 2.0 * k};
        seq.push_back(b.stop(k == 0 ? std::string{"m_union"}
                                    : std::string{"m_"} + names[i] + std::to_string(k),
                             p));
      }
      auto const in = seq;
      std::reverse(seq.begin(), seq.end());
      b.line(std::string{names[i]} + "_in", 2, seq, wk, 5 * 3600, 22 * 3600, 3600, 30.0);
      b.line(std::string{names[i]} + "_out", 2, in, wk, 5 * 3600 + 1800,
             22 * 3600 + 1800, 3600, 30.0);
      b.line(std::string{names[i]} + "_in_we", 2, seq, we, 6 * 3600, 22 * 3600, 7200,
             30.0);
      b.line(std::string{names[i]} + "_out_we", 2, in, we, 7 * 3600, 23 * 3600, 7200,
             30.0);
    }
    b.feed().fares = metra_fares();
    gtfs::write_feed(b.feed(), (dir / "metra").string());
  }
}

// ---- population --------------------------------------------------------------

xy random_home(rng& r) {
  if (r.uniform() < 0.55) {
    return {r.uniform(-kCityHalfWidth, kCityHalfWidth),
            r.uniform(-kCityHalfWidth, kCityHalfWidth)};
  }
  while (true) {
    xy const p{r.uniform(-kHalfWidth, kHalfWidth), r.uniform(-kHalfWidth, kHalfWidth)};
    if (std::abs(p.x) > kCityHalfWidth || std::abs(p.y) > kCityHalfWidth) {
      return p;
    }
  }
}

xy random_destination(rng& r, xy from, xy home) {
  while (true) {
    xy p;
    if (r.uniform() < 0.3) {
      p = {r.uniform(-3.0, 3.0), r.uniform(-3.0, 3.0)};
    } else {
      auto const u = r.uniform();
      auto const d = 0.4 + 7.6 * u * u;
      auto const a = r.uniform(0.0, 2.0 * 3.14159265358979323846);
      p = {std::clamp(from.x + d * std::cos(a), -kHalfWidth, kHalfWidth),
           std::clamp(from.y + d * std::sin(a), -kHalfWidth, kHalfWidth)};
    }
    if (dist(p, home) >= 0.5 && dist(p, from) >= 0.3) {
      return p;
    }
  }
}

struct planned_leg {
  xy o;
  xy d;
  time_stamp depart;
  time_stamp arrive;
  purpose why;
};

struct planned_person {
  person p;
  std::vector<planned_leg> legs;
  std::vector<raw_mode> modes;
};

struct planned_household {
  household h;
  xy home;
  std::vector<planned_person> members;
};

std::int32_t drive_seconds(double miles) {
  return static_cast<std::int32_t>(std::lround(miles * 1.3 / 25.0 * 3600.0)) + 300;
}

planned_household plan_household(rng& r, std::uint64_t id, date first_day,
                                  std::uint32_t days) {
  planned_household ph;
  ph.home = random_home(r);
  auto const city = std::abs(ph.home.x) <= kCityHalfWidth &&
                    std::abs(ph.home.y) <= kCityHalfWidth;
  auto const n_members =
      static_cast<std::uint32_t>(1 + r.pick(std::array{0.3, 0.35, 0.2, 0.15}));
  auto const n_vehicles = static_cast<std::uint32_t>(
      city ? r.pick(std::array{0.35, 0.45, 0.15, 0.05})
           : r.pick(std::array{0.05, 0.35, 0.4, 0.2}));
  auto const u = r.uniform();
  auto const income = std::round(15000.0 + 185000.0 * u * std::sqrt(u));
  ph.h = household{household_id{id}, to_point(ph.home), n_members, n_vehicles, income};

  auto const day = date_from_day_number(day_number(first_day) +
                                        static_cast<std::int64_t>(r.uniform() * days));
  std::set<std::int32_t> used;
  for (auto k = 1U; k <= n_members; ++k) {
    planned_person pp;
    pp.p = person{person_id{id * 10 + k}, ph.h.id, std::round(r.uniform(18.0, 88.0)),
                  r.uniform() < 0.5};
    auto const n_legs = r.uniform() < 0.6 ? 2U : 3U;
    std::int32_t t = 0;
    do {
      auto const latest = n_legs == 2 ? 19 * 60 : 14 * 60;
      t = 60 * static_cast<std::int32_t>(r.uniform(6 * 60, latest));
    } while (!used.insert(t).second);

    auto const first_purpose = static_cast<purpose>(
        std::array{purpose::work, purpose::shop, purpose::other}[r.pick(
            std::array{0.5, 0.25, 0.25})]);
    xy at = ph.home;
    auto abs = day_number(day) * kSecondsPerDay + t;
    for (auto leg = 0U; leg != n_legs; ++leg) {
      auto const last = leg + 1 == n_legs;
      xy const to = last ? ph.home : random_destination(r, at, ph.home);
      auto const why = last ? purpose::return_home
                            : (leg == 0 ? first_purpose
                                        : (r.uniform() < 0.5 ? purpose::shop
                                                             : purpose::other));
      auto const depart = time_stamp::from_absolute(abs).normalized();
      auto const arrive_abs = abs + drive_seconds(dist(at, to));
      time_stamp const arrive{depart.day(),
                              static_cast<std::int32_t>(
                                  arrive_abs - day_number(depart.day()) * kSecondsPerDay)};
      pp.legs.push_back({at, to, depart, arrive, why});
      auto const dwell_h = why == purpose::work ? r.uniform(6.0, 9.0) : r.uniform(0.5, 3.0);
      abs = arrive_abs + static_cast<std::int64_t>(std::lround(dwell_h * 3600.0));
      at = to;
    }
    ph.members.push_back(std::move(pp));
  }
  return ph;
}

trip as_trip(planned_person const& pp, std::size_t k) {
  auto const& l = pp.legs[k];
  trip t;
  t.id = trip_id{to_int(pp.p.id) * 10 + k + 1};
  t.person = pp.p.id;
  t.origin = to_point(l.o);
  t.destination = to_point(l.d);
  t.depart = l.depart;
  t.arrive = l.arrive;
  t.trip_purpose = l.why;
  t.tour = tour_id{to_int(pp.p.id)};
  t.leg_index = static_cast<std::uint32_t>(k);
  return t;
}

void write_file(fs::path const& p, std::string const& text) {
  std::ofstream out{p, std::ios::binary};
  if (!out) {
    throw io_error{"cannot write " + p.string()};
  }
  out << text;
}

}  // namespace

coefficient_table default_synthetic_truth() {
  using enum mode;
  using v = variable;
  coefficient_table t;
  t.parameters = {
      {"TravelTime_NonMotorized", -2.0, {{walk, v::travel_time}, {bike, v::travel_time}}, {}},
      {"TravelTime_Auto", -1.5, {{drive, v::travel_time}, {passenger, v::travel_time}}, {}},
      {"TravelTime_Transit",
       -1.0,
       {{cta, v::travel_time}, {pace, v::travel_time}, {hrail_slow, v::travel_time},
        {hrail_fast, v::travel_time}},
       {}},
      {"Fare",
       -0.5,
       {{drive, v::fare}, {passenger, v::fare}, {cta, v::fare}, {pace, v::fare},
        {hrail_slow, v::fare}, {hrail_fast, v::fare}},
       {}},
      {"AccessDistance_Transit",
       -1.2,
       {{cta, v::access_distance}, {pace, v::access_distance},
        {hrail_slow, v::access_distance}, {hrail_fast, v::access_distance}},
       {}},
      {"Transfers_Transit",
       -0.6,
       {{cta, v::transfers}, {pace, v::transfers}, {hrail_slow, v::transfers},
        {hrail_fast, v::transfers}},
       {}},
      {"HouseholdVehicles_Drive", 0.7, {{drive, v::household_vehicles}}, {}},
      {"Constant_Passenger", -1.0, {{passenger, v::constant}}, {}},
  };
  t.validate();
  return t;
}

void generate_synthetic(fs::path const& dir, synth_settings const& settings,
                        std::uint64_t seed, std::ostream& log) {
  fs::create_directories(dir);
  auto const truth = settings.truth ? load_coefficients(settings.truth->string())
                                    : default_synthetic_truth();
  auto const first_day = parse_date(settings.start_date);
  auto const last_day = date_from_day_number(day_number(first_day) + settings.days);

  build_feeds(dir / "gtfs", first_day, last_day);
  feed_set feeds;
  feeds.emplace("CTA", gtfs::parse_feed((dir / "gtfs" / "cta").string(), "CTA"));
  feeds.emplace("Pace", gtfs::parse_feed((dir / "gtfs" / "pace").string(), "Pace"));
  feeds.emplace("Metra", gtfs::parse_feed((dir / "gtfs" / "metra").string(), "Metra"));

  region_config region;
  for (auto ix = 0; ix != kZonesPerSide; ++ix) {
    for (auto iy = 0; iy != kZonesPerSide; ++iy) {
      auto const z = "Z" + std::to_string(ix) + "_" + std::to_string(iy);
      if (ix >= 2 && ix <= 5 && iy >= 2 && iy <= 5) {
        region.city_zones.insert(z);
      }
      if (ix >= 3 && ix <= 4 && iy >= 3 && iy <= 4) {
        region.cbd_zones.insert(z);
      }
    }
  }
  region.fares = {{"CTA", cta_fares()}, {"Pace", pace_fares()}, {"Metra", metra_fares()}};
  altgen_config const acfg;

  rng r{seed};
  std::uint64_t const choice_seed = mix64(seed ^ 0x636f6963655f7365ULL);
  std::vector<planned_household> hhs;
  std::array<std::size_t, kModeCount> shares{};
  std::size_t drawn = 0;
  std::size_t relabelled = 0;

  for (auto id = std::uint64_t{1}; id <= settings.households; ++id) {
    auto ph = plan_household(r, id, first_day, settings.days);

    std::vector<std::size_t> order(ph.members.size());
    for (auto i = std::size_t{0}; i != order.size(); ++i) {
      order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      return ph.members[a].legs[0].depart < ph.members[b].legs[0].depart;
    });

    // Members decide in departure order; earlier driven tours hold a
    // vehicle for the whole tour.
    vehicle_timeline timeline;
    timeline.household = ph.h.id;
    timeline.n_vehicles = ph.h.n_vehicles;
    for (auto const i : order) {
      auto& pp = ph.members[i];
      std::vector<trip> legs;
      tour tr;
      tr.id = tour_id{to_int(pp.p.id)};
      tr.person = pp.p.id;
      tr.starts_at_home = true;
      tr.returns_home = true;
      for (auto k = std::size_t{0}; k != pp.legs.size(); ++k) {
        legs.push_back(as_trip(pp, k));
        tr.trips.push_back(legs.back().id);
      }
      auto const& t0 = legs[0];
      auto const alts = generate_alternatives(t0, feeds, nullptr, acfg, region);
      auto const flags = compute_context_flags(t0, tr, legs, pp.p, region);
      auto cs = form_choice_set(t0, alts, flags, timeline, ph.h, tr, {});
      for (auto const m : kAllModes) {
        if (cs.available.test(index_of(m))) {
          cs.chosen = m;
          break;
        }
      }
      auto const obs = make_observation(cs, ph.h, pp.p, t0);
      auto const first = simulate_choice(obs, truth, choice_seed ^ to_int(t0.id));
      ++shares[index_of(first)];
      ++drawn;

      pp.modes.push_back(survey_label_for(first));
      for (auto k = std::size_t{1}; k != pp.legs.size(); ++k) {
        pp.modes.push_back(survey_label_for(first));
      }
      if (first == mode::drive) {
        timeline.intervals.push_back({pp.p.id, tr.id, t0.depart.absolute(),
                                      legs.back().arrive.absolute(), 0, false});
      } else if (r.uniform() < 0.005) {
        // a few observed modes outside the model
        pp.modes[0] = raw_mode::taxi;
        ++relabelled;
      }
    }
    hhs.push_back(std::move(ph));
  }

  // ---- survey files ----------------------------------------------------------
  std::ostringstream hh_out;
  std::ostringstream person_out;
  std::ostringstream trip_out;
  csv::write_row(hh_out, {"hh_id", "home_lat", "home_lon", "home_zone", "n_members",
                          "n_vehicles", "income"});
  csv::write_row(person_out, {"person_id", "hh_id", "age", "female"});
  csv::write_row(trip_out, {"trip_id", "person_id", "o_lat", "o_lon", "o_zone", "d_lat",
                            "d_lon", "d_zone", "depart_date", "depart_sec",
                            "arrive_sec", "mode", "purpose"});
  auto const trip_row = [&](std::string const& id, std::string const& pid,
                            geo_point const& o, geo_point const& d,
                            time_stamp dep, time_stamp arr, raw_mode m,
                            purpose why) {
    csv::write_row(trip_out,
                   {id, pid, csv::format_double(o.lat), csv::format_double(o.lon),
                    o.zone.value_or(""), csv::format_double(d.lat),
                    csv::format_double(d.lon), d.zone.value_or(""),
                    format_iso_date(dep.day()), std::to_string(dep.seconds()),
                    std::to_string(arr.seconds()), std::string{label_of(m)},
                    std::string{name_of(why)}});
  };
  std::size_t n_trips = 0;
  for (auto const& ph : hhs) {
    auto const& h = ph.h;
    csv::write_row(hh_out, {std::to_string(to_int(h.id)), csv::format_double(h.home.lat),
                            csv::format_double(h.home.lon), h.home.zone.value_or(""),
                            std::to_string(h.n_members), std::to_string(h.n_vehicles),
                            csv::format_double(h.income)});
    for (auto const& pp : ph.members) {
      csv::write_row(person_out,
                     {std::to_string(to_int(pp.p.id)), std::to_string(to_int(h.id)),
                      csv::format_double(pp.p.age), pp.p.is_female ? "1" : "0"});
      for (auto k = std::size_t{0}; k != pp.legs.size(); ++k) {
        auto const t = as_trip(pp, k);
        trip_row(std::to_string(to_int(t.id)), std::to_string(to_int(t.person)),
                 t.origin, t.destination, t.depart, t.arrive, pp.modes[k],
                 t.trip_purpose);
        ++n_trips;
      }
    }
  }
  // Invalid rows the ingest stage must reject.
  auto const extra = settings.households + 1;
  for (auto i = std::uint64_t{0}; i != 3; ++i) {
    csv::write_row(hh_out, {std::to_string(extra + i), "", "", "", "1", "1", "50000"});
  }
  auto const some = to_point({1.0, 1.0});
  auto const other = to_point({2.0, 2.0});
  time_stamp const noon{first_day, 12 * 3600};
  time_stamp const later{first_day, 13 * 3600};
  for (auto i = std::uint64_t{0}; i != 3; ++i) {
    trip_row(std::to_string(900000000 + i), std::to_string(extra * 10 + 1), some,
             other, noon, later, raw_mode::walk, purpose::other);
  }
  for (auto i = std::uint64_t{3}; i != 5; ++i) {
    trip_row(std::to_string(900000000 + i), "11", some, other, later, noon,
             raw_mode::walk, purpose::other);
  }

  write_file(dir / "household.csv", hh_out.str());
  write_file(dir / "person.csv", person_out.str());
  write_file(dir / "trip.csv", trip_out.str());
  write_file(dir / "region.json", to_json(region).dump(2) + "\n");
  save_coefficients(truth, (dir / "truth.json").string());
  auto spec = truth;
  for (auto& p : spec.parameters) {
    p.value = 0.0;
    p.t_stat.reset();
  }
  save_coefficients(spec, (dir / "estimation_spec.json").string());

  json const config{
      {"survey", {{"households", "household.csv"},
                  {"persons", "person.csv"},
                  {"trips", "trip.csv"}}},
      {"gtfs", {{"CTA", "gtfs/cta"}, {"Pace", "gtfs/pace"}, {"Metra", "gtfs/metra"}}},
      {"region", "region.json"},
      {"altgen", to_json(acfg)},
      {"out", "pipeline"},
      {"seed", seed},
      {"split", {{"train_fraction", 0.8}}},
      {"estimation", {{"spec", "estimation_spec.json"}}},
      {"apply", {{"preset", "truth.json"}}}};
  write_file(dir / "config.json", config.dump(2) + "\n");

  json share_json = json::object();
  for (auto const m : kAllModes) {
    share_json[std::string{name_of(m)}] = shares[index_of(m)];
  }
  write_file(dir / "synth_summary.json",
             json{{"households", settings.households},
                  {"first_leg_choices", drawn},
                  {"trips", n_trips},
                  {"relabelled_outside_model", relabelled},
                  {"first_leg_shares", share_json}}
                     .dump(2) +
                 "\n");
  log << "synth: " << settings.households << " households, " << drawn
      << " simulated first-leg choices, " << n_trips << " trips\n";
}

}  // namespace mclab
