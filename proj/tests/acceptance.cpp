// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mclab/error.hpp"
#include "mclab/gtfs.hpp"
#include "mclab/pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mclab;

namespace {

// tolerances
constexpr double kFdRel = 1e-6;
constexpr double kAxiomTol = 1e-12;
constexpr double kOddsTol = 1e-9;
constexpr double kIndexTol = 1e-3;
constexpr double kShareTol = 0.01;
constexpr double kDispersionTol = 1e-3;
constexpr double kMaxEstimateSeconds = 60.0;

// checks collect failures instead of aborting
struct checker {
  std::vector<std::string> failures;
  void expect(bool ok, std::string const& what) {
    if (!ok && failures.size() < 20) {
      failures.push_back(what);
    }
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

int run(int id, std::string const& title, std::function<void(checker&)> const& body) {
  checker c;
  auto const t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (std::exception const& e) {
    c.failures.push_back(std::string{"exception: "} + e.what());
  }
  auto const secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %d %s (%.1fs)\n", c.failures.empty() ? "PASS" : "FAIL", id,
              title.c_str(), secs);
  for (auto const& f : c.failures) {
    std::printf("    %s\n", f.c_str());
  }
  std::fflush(stdout);
  return c.failures.empty() ? 0 : 1;
}

json read_json(fs::path const& p) { return json::parse(test::read_file(p)); }

// ---- 1 ---------------------------------------------------------------------

void recovery(checker& c) {
  auto const dir = test::scratch_dir("acceptance_recovery");
  synth_settings s;
  s.households = 12500;
  std::ostringstream log;
  generate_synthetic(dir, s, 20240601, log);
  auto const cfg = load_pipeline_config(dir / "config.json");
  run_command("run", cfg, log);

  auto const result = read_json(cfg.out / "estimate" / "result.json");
  auto const meta = read_json(cfg.out / "estimate" / "run_metadata.json");
  auto const truth = load_coefficients((dir / "truth.json").string());

  auto const n = result.at("n_observations").get<std::size_t>();
  c.expect(n >= 20000, "training observations " + std::to_string(n) + " < 20000");
  c.expect(result.at("converged").get<bool>(), "not converged");
  auto const iters = result.at("iterations").get<int>();
  c.expect(iters <= 25, "iterations " + std::to_string(iters));
  auto const secs = meta.at("estimate_seconds").get<double>();
  c.expect(secs < kMaxEstimateSeconds, "estimate took " + num(secs) + " s");

  std::map<std::string, std::pair<double, double>> fitted;
  for (auto const& p : result.at("parameters")) {
    fitted[p.at("name").get<std::string>()] = {p.at("value").get<double>(),
                                               p.at("std_error").get<double>()};
  }
  c.expect(fitted.size() == truth.size(), "parameter count differs from truth");
  for (auto const& p : truth.parameters) {
    auto const it = fitted.find(p.name);
    if (it == fitted.end()) {
      c.expect(false, p.name + " missing from the fit");
      continue;
    }
    auto const [est, se] = it->second;
    c.expect(se > 0.0 && std::abs(est - p.value) <= 3.0 * se,
             p.name + ": estimate " + num(est) + ", truth " + num(p.value) +
                 ", se " + num(se));
  }
}

// ---- 2 ---------------------------------------------------------------------

void gradient(checker& c) {
  std::mt19937_64 gen{2024};
  std::vector<observation> data;
  for (auto n = 0; n != 50; ++n) {
    data.push_back(test::random_observation(gen, n));
  }
  auto table = test::small_table();
  std::normal_distribution<double> z{0.0, 1.0};
  for (auto point = 0; point != 5; ++point) {
    auto beta = table.values();
    for (auto& b : beta) {
      b += 0.5 * z(gen);
    }
    table.set_values(beta);
    auto const g = log_likelihood(data, table).gradient;
    for (auto k = std::size_t{0}; k != beta.size(); ++k) {
      auto const h = 1e-5 * std::max(1.0, std::abs(beta[k]));
      auto up = table;
      auto dn = table;
      auto bu = beta;
      auto bd = beta;
      bu[k] += h;
      bd[k] -= h;
      up.set_values(bu);
      dn.set_values(bd);
      auto const fd = (log_likelihood(data, up).value - log_likelihood(data, dn).value) / (2 * h);
      c.expect(std::abs(g[k] - fd) <= kFdRel * std::max(1.0, std::abs(fd)),
               table.parameters[k].name + " point " + std::to_string(point) +
                   ": analytic " + num(g[k]) + " fd " + num(fd));
    }
  }
}

// ---- 3 ---------------------------------------------------------------------

void mcfadden(checker& c) {
  auto const idx = mcfadden_index(-52426.0, -198583.3);
  c.expect(std::abs(idx - 0.736) <= kIndexTol, "index " + num(idx));
  c.expect(mcfadden_index(-120.0, -120.0) == 0.0, "lnL = lnL0 should give 0");
  c.expect(std::abs(mcfadden_index(-1e-12, -50.0) - 1.0) < 1e-12, "lnL -> 0 should give 1");
  auto throws = [](double a, double b) {
    try {
      (void)mcfadden_index(a, b);
    } catch (domain_error const&) {
      return true;
    }
    return false;
  };
  c.expect(throws(-1.0, 0.0), "lnL0 = 0 accepted");
  c.expect(throws(-300.0, -100.0), "lnL < lnL0 accepted");
  c.expect(throws(0.5, -100.0), "positive lnL accepted");
}

// ---- 4 ---------------------------------------------------------------------

void axioms(checker& c) {
  std::mt19937_64 gen{4};
  auto const table = test::small_table();
  std::normal_distribution<double> z{0.0, 4.0};
  for (auto n = 0; n != 10000; ++n) {
    auto const o = test::random_observation(gen, n);
    auto const p = probabilities(o, table);
    std::array<double, kModeCount> v{};
    for (auto i = std::size_t{0}; i != kModeCount; ++i) {
      v[i] = o.available.test(i) ? utility(o, kAllModes[i], table) : 0.0;
    }
    auto const shift = z(gen) * 100.0;
    auto moved = v;
    for (auto& x : moved) {
      x += shift;
    }
    auto const q = probabilities_from_utilities(moved, o.available);
    auto sum = 0.0;
    for (auto i = std::size_t{0}; i != kModeCount; ++i) {
      sum += p[i];
      c.expect(p[i] >= 0.0 && p[i] <= 1.0, "probability out of range");
      if (!o.available.test(i)) {
        c.expect(p[i] == 0.0, "unavailable alternative has mass, obs " + std::to_string(n));
      }
      c.expect(std::abs(p[i] - q[i]) <= kAxiomTol,
               "shift changed probability, obs " + std::to_string(n));
    }
    c.expect(std::abs(sum - 1.0) <= kAxiomTol, "sum " + num(sum) + " obs " + std::to_string(n));
  }
}

// ---- 5 ---------------------------------------------------------------------

bool in_log(std::vector<constraint_entry> const& log, constraint_rule r, mode m) {
  return std::find(log.begin(), log.end(), constraint_entry{r, m}) != log.end();
}

void choice_sets(checker& c, test::world const& w) {
  auto const formed = test::form_all(w);
  c.expect(formed.size() >= 500, "only " + std::to_string(formed.size()) + " formed trips");
  std::size_t vehicle_cases = 0;
  std::size_t lock_cases = 0;
  for (auto const& f : formed) {
    auto const id = std::to_string(to_int(f.t.id));
    auto const o = test::oracle_choice_set(w.pop, f.t, f.alternatives);
    c.expect(!o.degenerate, "oracle degenerate, trip " + id);
    c.expect(o.available == f.cs.available, "available set differs, trip " + id);
    c.expect(o.log == f.cs.log, "constraint log differs, trip " + id);
    c.expect(o.repairs == f.cs.repairs, "repairs differ, trip " + id);

    auto const drive = index_of(mode::drive);
    auto const repaired_drive = f.cs.chosen == mode::drive;
    auto const& p = w.pop.person_of(f.t.person);
    auto const& h = w.pop.household_of(p.household);
    auto const away = test::oracle_vehicles_away(w.pop, f.t.person, f.t.depart.absolute());
    if (away >= h.n_vehicles && f.alternatives[drive].available) {
      ++vehicle_cases;
      c.expect(!f.cs.available.test(drive) || repaired_drive,
               "Drive offered with every vehicle away, trip " + id);
      c.expect(in_log(f.cs.log, constraint_rule::vehicle_in_use, mode::drive) ||
                   in_log(f.cs.repairs, constraint_rule::vehicle_in_use, mode::drive),
               "VehicleInUse not recorded, trip " + id);
    }
    auto const legs = w.pop.legs_of(w.pop.tour_of(*f.t.tour));
    if (f.t.leg_index > 0 && legs.front().observed_mode != raw_mode::auto_driver) {
      ++lock_cases;
      c.expect(!f.cs.available.test(drive) || repaired_drive,
               "Drive offered after a non-Drive first leg, trip " + id);
    }
  }
  c.expect(vehicle_cases > 0, "no vehicle-in-use case exercised");
  c.expect(lock_cases > 0, "no tour-lock case exercised");
}

// ---- 6 ---------------------------------------------------------------------

double odds(observation const& o, coefficient_table const& t, mode a, mode b) {
  auto const p = probabilities(o, t);
  return p[index_of(a)] / p[index_of(b)];
}

void odds_ratios(checker& c) {
  auto const preset = load_coefficients(test::preset_path().string());
  std::mt19937_64 gen{6};
  auto const check = [&](mode m, variable v, double expected, std::string const& what) {
    for (auto n = 0; n != 50; ++n) {
      auto o = test::random_observation(gen, n);
      o.available.reset();
      o.available.set(index_of(m));
      o.available.set(index_of(mode::walk));
      auto const before = odds(o, preset, m, mode::walk);
      o.at(m, v) += 1.0;
      auto const ratio = odds(o, preset, m, mode::walk) / before;
      c.expect(std::abs(ratio - expected) <= kOddsTol * expected,
               what + ": ratio " + num(ratio) + " expected " + num(expected));
    }
  };
  check(mode::cta, variable::transfers, std::exp(-1.984761), "CTA transfer");
  check(mode::hrail_slow, variable::fare, std::exp(-1.694), "HRailSlowAccess fare");
  check(mode::hrail_fast, variable::fare, std::exp(-1.694), "HRailFastAccess fare");
}

// ---- 7 ---------------------------------------------------------------------

constexpr double kPi = 3.14159265358979323846;

double crow_miles(double lat1, double lon1, double lat2, double lon2) {
  auto const r = [](double d) { return d * kPi / 180.0; };
  auto const a = std::pow(std::sin(r(lat2 - lat1) / 2), 2) +
                 std::cos(r(lat1)) * std::cos(r(lat2)) *
                     std::pow(std::sin(r(lon2 - lon1) / 2), 2);
  return 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(a));
}

std::vector<std::string> split_line(std::string const& line) {
  std::vector<std::string> out;
  std::stringstream s{line};
  std::string f;
  while (std::getline(s, f, ',')) {
    out.push_back(f);
  }
  return out;
}

void gtfs_and_reports(checker& c, test::world const& w) {
  auto const f = test::load_fixture_feed();
  c.expect(f.stops.size() == 5 && f.routes.size() == 2 && f.trips.size() == 16 &&
               f.stop_times.size() == 48 && f.services.size() == 1,
           "fixture feed counts");
  c.expect(f.rejected.at("stop_times.txt") == 1, "GHOST stop time not rejected");

  // stops from the raw file
  std::vector<std::tuple<std::string, double, double>> stops;
  {
    std::ifstream in{test::fixture_path("gtfs_small/stops.txt")};
    std::string line;
    std::getline(in, line);
    auto const head = split_line(line);
    auto const col = [&](std::string const& n) {
      return std::find(head.begin(), head.end(), n) - head.begin();
    };
    while (std::getline(in, line)) {
      auto const v = split_line(line);
      stops.emplace_back(v[col("stop_id")], std::stod(v[col("stop_lat")]),
                         std::stod(v[col("stop_lon")]));
    }
  }
  std::mt19937_64 gen{7};
  std::uniform_real_distribution<double> lat{41.85, 41.91};
  std::uniform_real_distribution<double> lon{-87.75, -87.58};
  std::uniform_real_distribution<double> rad{0.0, 2.5};
  for (auto q = 0; q != 500; ++q) {
    auto const a = lat(gen);
    auto const b = lon(gen);
    auto const r = rad(gen);
    std::vector<std::pair<double, std::string>> want;
    for (auto const& [id, sa, sb] : stops) {
      auto const d = crow_miles(a, b, sa, sb);
      if (d <= r) {
        want.emplace_back(d, id);
      }
    }
    std::sort(want.begin(), want.end());
    auto const got = gtfs::stops_within(f, make_point(a, b), r);
    auto same = got.size() == want.size();
    for (auto i = std::size_t{0}; same && i != got.size(); ++i) {
      same = f.stops[got[i].stop].id == want[i].second;
    }
    c.expect(same, "stops_within query " + std::to_string(q));
  }

  // departures from the raw stop_times, weekdays of 2024 only
  std::vector<std::tuple<std::string, std::string, std::int32_t>> events;
  {
    std::ifstream in{test::fixture_path("gtfs_small/stop_times.txt")};
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      auto const v = split_line(line);
      if (v[0] == "GHOST") {
        continue;
      }
      auto const t = v[2];
      events.emplace_back(v[0], v[3],
                          std::stoi(t.substr(0, 2)) * 3600 + std::stoi(t.substr(3, 2)) * 60 +
                              std::stoi(t.substr(6, 2)));
    }
  }
  std::uniform_int_distribution<int> day{0, 20};
  std::uniform_int_distribution<int> sec{4 * 3600, 12 * 3600};
  std::uniform_int_distribution<int> len{0, 3 * 3600};
  std::uniform_int_distribution<int> which{1, 5};
  for (auto q = 0; q != 300; ++q) {
    auto const d = date_from_day_number(day_number(make_date(2024, 3, 1)) + day(gen));
    auto const stop = "S" + std::to_string(which(gen));
    auto const s0 = sec(gen);
    auto const from = time_stamp{d, s0};
    auto const to = time_stamp{d, s0 + len(gen)};
    std::vector<std::pair<std::int64_t, std::string>> want;
    for (auto dn = day_number(d) - 1; dn <= day_number(d); ++dn) {
      if (is_weekend(date_from_day_number(dn))) {
        continue;
      }
      for (auto const& [trip, st, dep] : events) {
        auto const at = dn * 86400 + dep;
        if (st == stop && from.absolute() <= at && at <= to.absolute()) {
          want.emplace_back(at, trip);
        }
      }
    }
    std::sort(want.begin(), want.end());
    auto const got = gtfs::departures(f, stop, from, to);
    auto same = got.size() == want.size();
    for (auto i = std::size_t{0}; same && i != got.size(); ++i) {
      same = got[i].at.absolute() == want[i].first && f.trips[got[i].trip].id == want[i].second;
    }
    c.expect(same, "departures query " + std::to_string(q) + " at " + stop);
  }

  auto const formed = test::form_all(w);
  std::vector<choice_set> sets;
  for (auto const& x : formed) {
    sets.push_back(x.cs);
  }
  for (auto const& m : test::check_reports(w.pop, sets)) {
    c.expect(false, m);
  }
}

// ---- 8 ---------------------------------------------------------------------

void dispersion(checker& c) {
  std::vector<time_observation> three{
      {"A", "B", "CTA", 10.0}, {"A", "B", "CTA", 20.0}, {"A", "B", "CTA", 30.0}};
  auto const r = travel_time_dispersion(three, 2);
  c.expect(r.records.size() == 1, "expected one group");
  if (!r.records.empty()) {
    c.expect(std::abs(r.records[0].ratio - 0.408) <= kDispersionTol,
             "ratio " + num(r.records[0].ratio));
    c.expect(std::abs(r.records[0].std_dev - std::sqrt(200.0 / 3.0)) < 1e-12,
             "population standard deviation");
  }
  std::vector<time_observation> five;
  for (auto i = 0; i != 5; ++i) {
    five.push_back({"A", "B", "Walk", 10.0 + 3.0 * i});
  }
  c.expect(travel_time_dispersion(five, 5).records.empty(), "five records not excluded");
  five.push_back({"A", "B", "Walk", 40.0});
  c.expect(travel_time_dispersion(five, 5).records.size() == 1, "six records excluded");
}

// ---- 9 ---------------------------------------------------------------------

std::map<std::string, std::string> tree(fs::path const& root) {
  std::map<std::string, std::string> out;
  for (auto const& e : fs::recursive_directory_iterator{root}) {
    if (e.is_regular_file() && e.path().filename() != "run_metadata.json") {
      out[e.path().lexically_relative(root).generic_string()] = test::read_file(e.path());
    }
  }
  return out;
}

void determinism(checker& c) {
  std::array<std::map<std::string, std::string>, 2> trees;
  for (auto i = 0; i != 2; ++i) {
    auto const dir = test::scratch_dir("acceptance_det_" + std::to_string(i));
    synth_settings s;
    s.households = 2000;
    std::ostringstream log;
    generate_synthetic(dir, s, 99, log);
    auto const cfg = load_pipeline_config(dir / "config.json");
    run_command("run", cfg, log);
    trees[i] = tree(dir);
    c.expect(fs::exists(cfg.out / "estimate" / "result.json"), "no estimate output");
  }
  c.expect(trees[0].size() == trees[1].size(), "file sets differ in size");
  for (auto const& [name, bytes] : trees[0]) {
    auto const it = trees[1].find(name);
    c.expect(it != trees[1].end() && it->second == bytes, name + " differs");
  }

  auto o = blank_observation(1);
  for (auto const m : {mode::walk, mode::cta}) {
    o.available.set(index_of(m));
    o.x[index_of(m)].fill(0.0);
    o.at(m, variable::constant) = 1.0;
  }
  coefficient_table t;
  t.parameters = {{"Constant_Walk", 0.7, {{mode::walk, variable::constant}}, {}},
                  {"Constant_CTA", 0.7, {{mode::cta, variable::constant}}, {}}};
  std::size_t walk = 0;
  constexpr std::size_t draws = 100000;
  for (auto s = std::uint64_t{0}; s != draws; ++s) {
    walk += simulate_choice(o, t, s) == mode::walk ? 1 : 0;
  }
  auto const share = static_cast<double>(walk) / draws;
  c.expect(std::abs(share - 0.5) <= kShareTol, "simulated share " + num(share));
}

}  // namespace

int main() {
  auto failed = 0;
  failed += run(1, "parameter recovery on 12,500 synthetic households", recovery);
  failed += run(2, "analytic gradient matches finite differences", gradient);
  failed += run(3, "McFadden index 0.736 and its identities", mcfadden);
  failed += run(4, "probability axioms on 10,000 random observations", axioms);

  std::unique_ptr<test::world> w;
  try {
    w = std::make_unique<test::world>(
        test::make_synthetic_world(test::scratch_dir("acceptance_world"), 190, 4242));
  } catch (std::exception const& e) {
    std::printf("    world: %s\n", e.what());
  }
  auto with_world = [&](auto fn) {
    return [&, fn](checker& c) {
      if (!w) {
        throw std::runtime_error{"synthetic world unavailable"};
      }
      fn(c, *w);
    };
  };
  failed += run(5, "choice sets match the rule oracle", with_world(choice_sets));
  failed += run(6, "preset odds ratios for transfers and heavy-rail fare", odds_ratios);
  failed += run(7, "GTFS queries and analytics reports match oracles",
                with_world(gtfs_and_reports));
  failed += run(8, "travel-time dispersion", dispersion);
  failed += run(9, "end-to-end determinism and simulation shares", determinism);

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
