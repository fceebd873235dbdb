#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "mclab/pipeline.hpp"
#include "mclab/region.hpp"

#ifndef MCLAB_TEST_FIXTURES
#error "MCLAB_TEST_FIXTURES must point at tests/fixtures"
#endif
#ifndef MCLAB_PRESETS
#error "MCLAB_PRESETS must point at presets/"
#endif
#ifndef MCLAB_TEST_SCRATCH
#error "MCLAB_TEST_SCRATCH must point at a writable directory"
#endif

namespace mclab::test {

fs::path fixture_path(std::string_view rel) {
  return fs::path{MCLAB_TEST_FIXTURES} / rel;
}

fs::path preset_path() {
  return fs::path{MCLAB_PRESETS} / "home_based_mode_choice.json";
}

fs::path scratch_dir(std::string_view name) {
  auto const p = fs::path{MCLAB_TEST_SCRATCH} / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(fs::path const& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

population load_fixture_survey() {
  auto const d = fixture_path("survey");
  return build_tours(parse_survey((d / "household.csv").string(),
                                  (d / "person.csv").string(),
                                  (d / "trip.csv").string()));
}

gtfs::feed load_fixture_feed() {
  return gtfs::parse_feed(fixture_path("gtfs_small").string(), "CTA");
}

world make_synthetic_world(fs::path const& dir, std::size_t households,
                           std::uint64_t seed) {
  synth_settings s;
  s.households = households;
  std::ostringstream sink;
  generate_synthetic(dir, s, seed, sink);

  world w;
  w.dir = dir;
  w.pop = build_tours(parse_survey((dir / "household.csv").string(),
                                   (dir / "person.csv").string(),
                                   (dir / "trip.csv").string()));
  auto const cfg = nlohmann::json::parse(read_file(dir / "config.json"));
  for (auto const& [agency, sub] : cfg.at("gtfs").items()) {
    w.feeds.emplace(agency, gtfs::parse_feed(
                                (dir / sub.get<std::string>()).string(), agency));
  }
  w.region = load_region_config((dir / "region.json").string());
  w.altgen = altgen_config_from_json(cfg.at("altgen"));
  return w;
}

std::vector<formed_trip> form_all(world const& w) {
  auto const timelines = build_timelines(w.pop);
  std::vector<formed_trip> out;
  for (auto const& tr : w.pop.tours) {
    auto const legs = w.pop.legs_of(tr);
    std::vector<std::optional<mode>> prior;
    for (auto const& l : legs) {
      prior.push_back(map_survey_mode(l.observed_mode));
    }
    auto const& p = w.pop.person_of(tr.person);
    auto const& h = w.pop.household_of(p.household);
    for (auto k = std::size_t{0}; k != legs.size(); ++k) {
      formed_trip f;
      f.t = legs[k];
      f.alternatives =
          generate_alternatives(f.t, w.feeds, nullptr, w.altgen, w.region);
      auto const flags = compute_context_flags(f.t, tr, legs, p, w.region);
      try {
        f.cs = form_choice_set(f.t, f.alternatives, flags, timelines.at(h.id), h,
                               tr, std::span{prior.data(), k});
      } catch (degenerate_choice_set const&) {
        continue;
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::uint32_t oracle_vehicles_away(population const& pop, person_id who,
                                   std::int64_t t) {
  auto const hh = pop.person_of(who).household;
  auto n = std::uint32_t{0};
  for (auto const& tr : pop.tours) {
    if (tr.person == who || pop.person_of(tr.person).household != hh) {
      continue;
    }
    auto const& first = pop.trip_of(tr.trips.front());
    if (first.observed_mode != raw_mode::auto_driver) {
      continue;
    }
    auto const start = first.depart.absolute();
    auto end = pop.trip_of(tr.trips.back()).arrive.absolute();
    if (!tr.returns_home) {
      // open tours hold the car until midnight after they left
      auto const midnight = (start / 86400 + 1) * 86400;
      end = std::max(end, midnight);
    }
    if (start <= t && t <= end) {
      ++n;
    }
  }
  return n;
}

oracle_choice oracle_choice_set(population const& pop, trip const& t,
                                alternative_set const& alternatives) {
  auto const& tr = pop.tour_of(*t.tour);
  auto const leg = *t.leg_index;
  auto const& h = pop.household_of(pop.person_of(t.person).household);
  auto const first_drove =
      pop.trip_of(tr.trips.front()).observed_mode == raw_mode::auto_driver;
  auto const last_leg = leg + 1 == tr.trips.size();
  auto const away = oracle_vehicles_away(pop, t.person, t.depart.absolute());

  oracle_choice o;
  for (auto i = std::size_t{0}; i != kModeCount; ++i) {
    auto const m = static_cast<mode>(i);
    std::optional<constraint_rule> hit;
    if (!alternatives[i].available) {
      hit = constraint_rule::no_service;
    } else if (m == mode::drive && (h.n_vehicles == 0 || away >= h.n_vehicles)) {
      hit = constraint_rule::vehicle_in_use;
    } else if (leg > 0) {
      bool allowed = false;
      if (first_drove) {
        allowed = m == mode::drive ||
                  (m == mode::passenger && !(tr.returns_home && last_leg));
      } else {
        allowed = m != mode::drive;
      }
      if (!allowed) {
        hit = constraint_rule::tour_lock;
      }
    }
    if (hit) {
      o.log.push_back({*hit, m});
    } else {
      o.available.set(i);
    }
  }
  std::stable_sort(o.log.begin(), o.log.end(), [](auto const& a, auto const& b) {
    return std::tie(a.rule, a.m) < std::tie(b.rule, b.m);
  });

  if (auto const chosen = map_survey_mode(t.observed_mode);
      chosen && !o.available.test(index_of(*chosen))) {
    auto const it = std::find_if(o.log.begin(), o.log.end(),
                                 [&](auto const& e) { return e.m == *chosen; });
    o.repairs.push_back(*it);
    o.log.erase(it);
    o.available.set(index_of(*chosen));
  }
  o.degenerate = o.available.none();
  return o;
}

observation random_observation(std::mt19937_64& gen, std::uint64_t id) {
  std::uniform_real_distribution<double> u{0.0, 1.0};
  auto obs = blank_observation(id);
  for (auto const m : kAllModes) {
    auto& x = obs.x[index_of(m)];
    x[static_cast<std::size_t>(variable::travel_time)] = 0.05 + 1.5 * u(gen);
    x[static_cast<std::size_t>(variable::household_members)] =
        1.0 + std::floor(4.0 * u(gen));
    x[static_cast<std::size_t>(variable::household_vehicles)] =
        std::floor(3.0 * u(gen));
    x[static_cast<std::size_t>(variable::female)] = u(gen) < 0.5 ? 1.0 : 0.0;
    x[static_cast<std::size_t>(variable::transfers)] = std::floor(3.0 * u(gen));
    x[static_cast<std::size_t>(variable::income)] = 2.0 * u(gen);
    x[static_cast<std::size_t>(variable::city_suburb_rush)] = u(gen) < 0.2;
    x[static_cast<std::size_t>(variable::cbd_rush)] = u(gen) < 0.2;
    x[static_cast<std::size_t>(variable::shopping)] = u(gen) < 0.3;
    x[static_cast<std::size_t>(variable::work)] = u(gen) < 0.4;
    x[static_cast<std::size_t>(variable::weekend)] = u(gen) < 0.3;
    x[static_cast<std::size_t>(variable::access_distance)] = u(gen);
    x[static_cast<std::size_t>(variable::egress_distance)] = u(gen);
    x[static_cast<std::size_t>(variable::dest_within_walk)] = u(gen) < 0.3;
    x[static_cast<std::size_t>(variable::age_over_65)] = u(gen) < 0.15;
    x[static_cast<std::size_t>(variable::fare)] = 4.0 * u(gen);
    x[static_cast<std::size_t>(variable::constant)] = 1.0;
  }
  while (obs.available.none()) {
    for (auto i = std::size_t{0}; i != kModeCount; ++i) {
      obs.available.set(i, u(gen) < 0.6);
    }
  }
  std::vector<std::size_t> avail;
  for (auto i = std::size_t{0}; i != kModeCount; ++i) {
    if (obs.available.test(i)) {
      avail.push_back(i);
    }
  }
  obs.chosen = avail[static_cast<std::size_t>(u(gen) * avail.size()) % avail.size()];
  return obs;
}

coefficient_table small_table() {
  using enum mode;
  using enum variable;
  auto const transit = [](variable v) {
    return std::vector<slot>{{cta, v}, {pace, v}, {hrail_slow, v}, {hrail_fast, v}};
  };
  coefficient_table c;
  c.parameters = {
      {"TravelTime_Walk", -1.5, {{walk, travel_time}}, {}},
      {"TravelTime_Bike", -1.2, {{bike, travel_time}}, {}},
      {"TravelTime_Auto", -0.9, {{drive, travel_time}, {passenger, travel_time}}, {}},
      {"TravelTime_Transit", -0.7, transit(travel_time), {}},
      {"Fare", -0.4,
       {{drive, fare}, {passenger, fare}, {cta, fare}, {pace, fare},
        {hrail_slow, fare}, {hrail_fast, fare}},
       {}},
      {"Transfers_Transit", -0.5, transit(transfers), {}},
      {"Income_Drive", 0.6, {{drive, income}}, {}},
      {"Female_Walk", 0.3, {{walk, female}}, {}},
      {"Constant_Bike", -0.8, {{bike, constant}}, {}},
      {"Constant_Drive", 0.5, {{drive, constant}}, {}},
      {"Constant_Passenger", -0.6, {{passenger, constant}}, {}},
      {"Constant_CTA", 0.2, {{cta, constant}}, {}},
  };
  return c;
}

}  // namespace mclab::test

namespace mclab::test {

namespace {

constexpr std::string_view kTransitLabels[] = {
    "Metra Train", "Metra Train (drive access)", "CTA Train", "CTA Bus",
    "Pace Bus", "More than one transit provider", "Local Transit (NIRPC region)"};

bool transit_label(raw_mode r) {
  return std::find(std::begin(kTransitLabels), std::end(kTransitLabels),
                   label_of(r)) != std::end(kTransitLabels);
}

void expect_eq(std::vector<std::string>& out, std::string const& what,
               std::size_t got, std::size_t want) {
  if (got != want) {
    out.push_back(what + ": got " + std::to_string(got) + ", want " +
                  std::to_string(want));
  }
}

bool agency_has(mode_set s, int a) {
  switch (a) {
    case 0: return s.test(index_of(mode::cta));
    case 1: return s.test(index_of(mode::pace));
    default:
      return s.test(index_of(mode::hrail_slow)) || s.test(index_of(mode::hrail_fast));
  }
}

}  // namespace

std::vector<std::string> check_reports(population const& pop,
                                       std::span<choice_set const> sets) {
  std::vector<std::string> bad;

  // previous leg driven
  {
    std::map<std::string, std::array<std::size_t, 2>> want;
    for (auto const& t : pop.trips) {
      if (!t.leg_index || *t.leg_index == 0) {
        continue;
      }
      for (auto const& prev : pop.trips) {
        if (prev.tour == t.tour && prev.leg_index &&
            *prev.leg_index + 1 == *t.leg_index &&
            prev.observed_mode == raw_mode::auto_driver) {
          auto& cell = want[std::string{label_of(t.observed_mode)}];
          ++cell[t.trip_purpose == purpose::return_home ? 0 : 1];
        }
      }
    }
    auto const got = previous_mode_crosstab(pop);
    expect_eq(bad, "previous_mode rows", got.rows.size(), want.size());
    for (auto r = std::size_t{0}; r != got.rows.size(); ++r) {
      auto const& w = want[got.rows[r]];
      expect_eq(bad, "previous_mode " + got.rows[r] + " ReturnHome", got.counts[r][0], w[0]);
      expect_eq(bad, "previous_mode " + got.rows[r] + " Others", got.counts[r][1], w[1]);
    }
  }

  // vehicle in use, single-vehicle households
  {
    std::map<std::string, std::array<std::size_t, 2>> want;
    for (auto const& t : pop.trips) {
      auto const& h = pop.household_of(pop.person_of(t.person).household);
      if (h.n_vehicles != 1) {
        continue;
      }
      auto& cell = want[std::string{label_of(t.observed_mode)}];
      ++cell[1];
      if (oracle_vehicles_away(pop, t.person, t.depart.absolute()) >= 1) {
        ++cell[0];
      }
    }
    auto const got = vehicle_in_use_mode_share(pop, build_timelines(pop));
    expect_eq(bad, "vehicle_in_use rows", got.size(), want.size());
    for (auto const& row : got) {
      auto const& w = want[row.label];
      expect_eq(bad, "vehicle_in_use " + row.label + " hits", row.hits, w[0]);
      expect_eq(bad, "vehicle_in_use " + row.label + " total", row.total, w[1]);
    }
  }

  // availability by agency
  {
    auto const got = transit_availability_report(sets);
    for (auto a = 0; a != 4; ++a) {
      std::size_t yes = 0;
      for (auto const& cs : sets) {
        auto const has = a == 3 ? (agency_has(cs.service, 0) || agency_has(cs.service, 1) ||
                                   agency_has(cs.service, 2))
                                : agency_has(cs.service, a);
        yes += has ? 1 : 0;
      }
      expect_eq(bad, "availability " + got[a].label + " available", got[a].available, yes);
      expect_eq(bad, "availability " + got[a].label + " not", got[a].not_available,
                sets.size() - yes);
      expect_eq(bad, "availability " + got[a].label + " sum", got[a].sum(), sets.size());
    }
  }

  // availability by origin zone
  {
    std::map<std::string, std::array<std::size_t, 2>> want;
    for (auto const& cs : sets) {
      auto const& t = pop.trip_of(cs.trip);
      if (!t.origin.zone) {
        continue;
      }
      auto& cell = want[*t.origin.zone];
      ++cell[0];
      if (agency_has(cs.service, 0) || agency_has(cs.service, 1) || agency_has(cs.service, 2)) {
        ++cell[1];
      }
    }
    auto const got = transit_availability_by_zone(sets, pop);
    expect_eq(bad, "zone availability rows", got.size(), want.size());
    for (auto const& z : got) {
      expect_eq(bad, "zone availability " + z.zone, z.trips, want[z.zone][0]);
      expect_eq(bad, "zone availability any " + z.zone, z.any_transit, want[z.zone][1]);
    }
  }

  // OD mismatch
  {
    std::set<std::pair<std::string, std::string>> pairs;
    for (auto const& cs : sets) {
      auto const& t = pop.trip_of(cs.trip);
      if (t.origin.zone && t.destination.zone) {
        pairs.emplace(*t.origin.zone, *t.destination.zone);
      }
    }
    std::array<std::array<std::size_t, 2>, 4> want{};
    for (auto const& pr : pairs) {
      for (auto a = 0; a != 3; ++a) {
        std::size_t with = 0;
        std::size_t without = 0;
        for (auto const& cs : sets) {
          auto const& t = pop.trip_of(cs.trip);
          if (t.origin.zone == pr.first && t.destination.zone == pr.second) {
            ++(agency_has(cs.service, a) ? with : without);
          }
        }
        if (with > 0 && without > 0) {
          want[a][0] += without;
          want[a][1] += with;
          want[3][0] += without;
          want[3][1] += with;
        }
      }
    }
    auto const got = od_transit_mismatch(sets, pop);
    for (auto a = 0; a != 4; ++a) {
      expect_eq(bad, "mismatch " + got[a].agency + " without", got[a].without, want[a][0]);
      expect_eq(bad, "mismatch " + got[a].agency + " with", got[a].with, want[a][1]);
    }
  }

  // ridership by origin zone
  {
    std::map<std::string, std::array<std::size_t, 2>> want;
    for (auto const& t : pop.trips) {
      if (!t.origin.zone) {
        continue;
      }
      auto& cell = want[*t.origin.zone];
      ++cell[1];
      cell[0] += transit_label(t.observed_mode) ? 1 : 0;
    }
    auto const got = ridership_by_zone(pop);
    expect_eq(bad, "ridership rows", got.size(), want.size());
    for (auto const& z : got) {
      expect_eq(bad, "ridership transit " + z.zone, z.transit, want[z.zone][0]);
      expect_eq(bad, "ridership total " + z.zone, z.total, want[z.zone][1]);
    }
  }
  return bad;
}

}  // namespace mclab::test
