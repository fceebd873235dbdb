#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mclab/analytics.hpp"
#include "mclab/csv.hpp"
#include "support.hpp"

namespace mclab {
namespace {

auto const kDay = make_date(2024, 3, 6);

choice_set set_with(std::uint64_t trip, std::initializer_list<mode> service) {
  choice_set cs;
  cs.trip = trip_id{trip};
  for (auto const m : {mode::walk, mode::bike, mode::drive, mode::passenger}) {
    cs.service.set(index_of(m));
  }
  for (auto const m : service) {
    cs.service.set(index_of(m));
  }
  cs.available = cs.service;
  return cs;
}

// One household, one person, trips between zones A and B.
population od_population(std::size_t n, std::string const& oz = "A",
                         std::string const& dz = "B") {
  population pop;
  pop.households.push_back(household{household_id{1}, make_point(41.9, -87.6, "A"), 1, 1, 1e4});
  pop.persons.push_back(person{person_id{1}, household_id{1}, 30, false});
  for (auto i = std::size_t{0}; i != n; ++i) {
    trip t;
    t.id = trip_id{i + 1};
    t.person = person_id{1};
    t.origin = make_point(41.9, -87.6, oz);
    t.destination = make_point(41.95, -87.6, dz);
    t.depart = time_stamp{kDay, static_cast<std::int32_t>(3600 + 1000 * i)};
    t.arrive = time_stamp{kDay, static_cast<std::int32_t>(3600 + 1000 * i + 500)};
    pop.trips.push_back(t);
  }
  pop.reindex();
  return pop;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

TEST(PreviousMode, HandLabeledSix) {
  // two tours: Drive, Drive, Passenger, Drive(home) and Walk, Walk(home)
  population pop;
  pop.households.push_back(household{household_id{1}, make_point(41.9, -87.6), 1, 1, 1e4});
  pop.persons.push_back(person{person_id{1}, household_id{1}, 30, false});
  raw_mode const modes[] = {raw_mode::auto_driver, raw_mode::auto_driver,
                            raw_mode::auto_passenger, raw_mode::auto_driver,
                            raw_mode::walk, raw_mode::walk};
  purpose const purposes[] = {purpose::work, purpose::shop, purpose::other,
                              purpose::return_home, purpose::other,
                              purpose::return_home};
  for (auto i = 0U; i != 6; ++i) {
    trip t;
    t.id = trip_id{i + 1};
    t.person = person_id{1};
    t.depart = time_stamp{kDay, static_cast<std::int32_t>(3600 * (i + 6))};
    t.arrive = time_stamp{kDay, static_cast<std::int32_t>(3600 * (i + 6) + 600)};
    t.observed_mode = modes[i];
    t.trip_purpose = purposes[i];
    t.tour = tour_id{i < 4 ? 1U : 2U};
    t.leg_index = i < 4 ? i : i - 4;
    pop.trips.push_back(t);
  }
  pop.tours.push_back(tour{tour_id{1}, person_id{1}, {trip_id{1}, trip_id{2}, trip_id{3}, trip_id{4}}, true, true});
  pop.tours.push_back(tour{tour_id{2}, person_id{1}, {trip_id{5}, trip_id{6}}, true, true});
  pop.reindex();

  auto const ct = previous_mode_crosstab(pop);
  // after a driven leg: trip 2 (Drive, Shop), trip 3 (Passenger, Other)
  ASSERT_EQ(ct.rows.size(), 2U);
  EXPECT_EQ(ct.rows[0], "Auto / Van / Truck Driver");
  EXPECT_EQ(ct.counts[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ct.rows[1], "Auto / Van / Truck Passenger");
  EXPECT_EQ(ct.counts[1], (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(test::check_reports(pop, {}).empty());
}

TEST(PreviousMode, NoDriveTripsEmpty) {
  auto pop = od_population(3);
  EXPECT_TRUE(previous_mode_crosstab(pop).empty());
}

TEST(PreviousMode, FixtureReturnHomeCell) {
  auto const pop = test::load_fixture_survey();
  auto const ct = previous_mode_crosstab(pop);
  ASSERT_EQ(ct.rows.size(), 1U);
  EXPECT_EQ(ct.rows[0], "Auto / Van / Truck Driver");
  EXPECT_EQ(ct.counts[0], (std::vector<std::size_t>{1, 0}));
  EXPECT_DOUBLE_EQ(ct.percent(0, 0), 100.0);
}

TEST(VehicleInUse, FixtureConflictedWalk) {
  auto const pop = test::load_fixture_survey();
  auto const rows = vehicle_in_use_mode_share(pop, build_timelines(pop));
  // household 1 only: driver trips 111, 112 and walk trips 121, 122
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[0].label, "Auto / Van / Truck Driver");
  EXPECT_EQ(rows[0].hits, 0U);
  EXPECT_EQ(rows[0].total, 2U);
  EXPECT_EQ(rows[1].label, "Walk");
  EXPECT_EQ(rows[1].hits, 2U);
  EXPECT_EQ(rows[1].total, 2U);
  // household 3 has two vehicles and contributes nothing
  for (auto const& r : rows) {
    EXPECT_NE(r.label, "Metra Train (drive access)");
  }
}

TEST(Availability, TenTripsFourCta) {
  std::vector<choice_set> sets;
  for (auto i = 0U; i != 10; ++i) {
    sets.push_back(i < 4 ? set_with(i + 1, {mode::cta}) : set_with(i + 1, {}));
  }
  auto const cols = transit_availability_report(sets);
  EXPECT_EQ(cols[0].label, "CTA");
  EXPECT_EQ(cols[0].not_available, 6U);
  EXPECT_EQ(cols[0].available, 4U);
  EXPECT_EQ(cols[0].sum(), 10U);
  std::ostringstream out;
  write_availability_csv(out, cols);
  auto const t = csv::parse(out.str());
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"CTA", "6", "60.00", "4", "40.00", "10"}));
}

TEST(Availability, DesertHasNoTransit) {
  std::vector<choice_set> sets;
  for (auto i = 0U; i != 5; ++i) {
    sets.push_back(set_with(i + 1, {}));
  }
  auto const cols = transit_availability_report(sets);
  EXPECT_EQ(cols[3].label, "AnyTransit");
  EXPECT_EQ(cols[3].available, 0U);
  EXPECT_EQ(cols[3].not_available, 5U);
}

TEST(Mismatch, ThreeWithTwoWithout) {
  auto const pop = od_population(5);
  std::vector<choice_set> sets;
  for (auto i = 0U; i != 5; ++i) {
    sets.push_back(i < 3 ? set_with(i + 1, {mode::cta}) : set_with(i + 1, {}));
  }
  auto const rows = od_transit_mismatch(sets, pop);
  EXPECT_EQ(rows[0].agency, "CTA");
  EXPECT_EQ(rows[0].without, 2U);
  EXPECT_EQ(rows[0].with, 3U);
  EXPECT_EQ(rows[3].agency, "Sum");
  EXPECT_EQ(rows[3].without, 2U);
  EXPECT_EQ(rows[3].with, 3U);
}

TEST(Mismatch, AllServedPairExcluded) {
  auto const pop = od_population(4);
  std::vector<choice_set> sets;
  for (auto i = 0U; i != 4; ++i) {
    sets.push_back(set_with(i + 1, {mode::cta}));
  }
  auto const rows = od_transit_mismatch(sets, pop);
  EXPECT_EQ(rows[0].with + rows[0].without, 0U);
}

TEST(Dispersion, IdenticalTimes) {
  std::vector<time_observation> obs(6, {"A", "B", "Walk", 12.0});
  auto const r = travel_time_dispersion(obs);
  ASSERT_EQ(r.records.size(), 1U);
  EXPECT_EQ(r.records[0].ratio, 0.0);
}

TEST(Dispersion, TenTwentyThirty) {
  std::vector<time_observation> obs{{"A", "B", "CTA", 10.0}, {"A", "B", "CTA", 20.0},
                                    {"A", "B", "CTA", 30.0}};
  auto const r = travel_time_dispersion(obs, 2);
  ASSERT_EQ(r.records.size(), 1U);
  EXPECT_DOUBLE_EQ(r.records[0].mean, 20.0);
  EXPECT_NEAR(r.records[0].std_dev, std::sqrt(200.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.records[0].std_dev, 8.165, 1e-3);
  EXPECT_NEAR(r.records[0].ratio, 0.408, 1e-3);
  EXPECT_EQ(r.histogram.at("CTA").size(), 9U);  // 0.408 falls in bin 8
  EXPECT_EQ(r.histogram.at("CTA")[8], 1U);
}

TEST(Dispersion, FiveIsNotMoreThanFive) {
  std::vector<time_observation> obs;
  for (auto i = 0; i != 5; ++i) {
    obs.push_back({"A", "B", "Bike", 10.0 + i});
  }
  EXPECT_TRUE(travel_time_dispersion(obs, 5).records.empty());
  obs.push_back({"A", "B", "Bike", 20.0});
  EXPECT_EQ(travel_time_dispersion(obs, 5).records.size(), 1U);
}

TEST(Ridership, TwoOfTen) {
  auto pop = od_population(10, "Z");
  for (auto i = 0U; i != 10; ++i) {
    pop.trips[i].observed_mode = i < 2 ? raw_mode::cta_bus : raw_mode::walk;
  }
  auto const z = ridership_by_zone(pop);
  ASSERT_EQ(z.size(), 1U);
  EXPECT_EQ(z[0].zone, "Z");
  EXPECT_DOUBLE_EQ(z[0].share(), 0.2);
}

TEST(Ridership, EmptyZoneOmittedAndThreeZones) {
  auto pop = test::load_fixture_survey();
  auto const z = ridership_by_zone(pop);
  // origin zones of the fixture: Z1, Z2, C1, S1
  std::vector<std::string> zones;
  for (auto const& r : z) {
    zones.push_back(r.zone);
    EXPECT_GT(r.total, 0U);
  }
  EXPECT_EQ(zones, (std::vector<std::string>{"C1", "S1", "Z1", "Z2"}));
  EXPECT_TRUE(test::check_reports(pop, {}).empty());
}

TEST(Percentages, RecomputeFromCounts) {
  auto const pop = test::load_fixture_survey();
  std::ostringstream a;
  previous_mode_crosstab(pop).write_csv(a);
  auto const ta = csv::parse(a.str());
  for (auto const& row : ta.rows) {
    std::size_t total = 0;
    for (auto const& r : ta.rows) {
      if (r[0] != "Total") {
        total += std::stoul(r[1]);
      }
    }
    if (row[0] != "Total") {
      EXPECT_EQ(row[2], fmt2(total == 0 ? 0.0 : 100.0 * std::stoul(row[1]) / total));
    }
  }
  std::ostringstream b;
  write_share_csv(b, vehicle_in_use_mode_share(pop, build_timelines(pop)));
  for (auto const& row : csv::parse(b.str()).rows) {
    EXPECT_EQ(row[3], fmt2(100.0 * std::stoul(row[1]) / std::stoul(row[2])));
  }
}

TEST(Reports, SyntheticThousandTripsMatchOracle) {
  auto const w = test::make_synthetic_world(test::scratch_dir("analytics_synth"), 190, 4242);
  auto const formed = test::form_all(w);
  std::vector<choice_set> sets;
  for (auto const& f : formed) {
    sets.push_back(f.cs);
  }
  ASSERT_GE(w.pop.trips.size(), 800U);
  ASSERT_LE(w.pop.trips.size(), 1200U);
  auto const bad = test::check_reports(w.pop, sets);
  for (auto const& b : bad) {
    ADD_FAILURE() << b;
  }
}

}  // namespace
}  // namespace mclab
