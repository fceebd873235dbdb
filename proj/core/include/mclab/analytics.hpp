#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mclab/choiceset.hpp"
#include "mclab/survey.hpp"

namespace mclab {

// Counts by row label and column group. Percentages are per column.
struct cross_tab {
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::size_t>> counts;  // [row][column]

  std::size_t column_total(std::size_t c) const;
  double percent(std::size_t r, std::size_t c) const;
  bool empty() const { return rows.empty(); }
  void write_csv(std::ostream& out) const;
};

// Mode of every trip whose previous leg in the same tour was driven, split
// into ReturnHome and Others. Rows in raw label order, empty rows omitted.
cross_tab previous_mode_crosstab(population const& pop);

struct share_row {
  std::string label;
  std::size_t hits{0};
  std::size_t total{0};
  double share() const {
    return total == 0 ? 0.0 : static_cast<double>(hits) / total;
  }
};

// Single-vehicle households only: per observed mode, trips departing while
// another member has the vehicle versus all trips.
std::vector<share_row> vehicle_in_use_mode_share(
    population const& pop,
    std::map<household_id, vehicle_timeline> const& timelines);
void write_share_csv(std::ostream& out, std::vector<share_row> const& rows);

struct availability_column {
  std::string label;
  std::size_t available{0};
  std::size_t not_available{0};
  std::size_t sum() const { return available + not_available; }
};

// CTA, Pace, HeavyRail (either access) and AnyTransit, from router
// availability.
std::vector<availability_column> transit_availability_report(
    std::span<choice_set const> sets);
void write_availability_csv(std::ostream& out,
                            std::vector<availability_column> const& cols);

struct zone_availability {
  std::string zone;
  std::size_t trips{0};
  std::size_t any_transit{0};
};

// Share of trips from each origin zone with any transit alternative.
std::vector<zone_availability> transit_availability_by_zone(
    std::span<choice_set const> sets, population const& pop);

struct mismatch_row {
  std::string agency;
  std::size_t without{0};
  std::size_t with{0};
};

// Zone pairs where some trips have the agency's alternative and some do not;
// rows CTA, Pace, Rail, Sum.
std::vector<mismatch_row> od_transit_mismatch(std::span<choice_set const> sets,
                                              population const& pop);

struct time_observation {
  std::string o_zone;
  std::string d_zone;
  std::string mode;
  double time{0.0};
};

struct dispersion_record {
  std::string o_zone;
  std::string d_zone;
  std::string mode;
  std::size_t n{0};
  double mean{0.0};
  double std_dev{0.0};  // population convention
  double ratio{0.0};
};

struct dispersion_report {
  std::vector<dispersion_record> records;
  double bin_width{0.05};
  // Per mode: count of groups per ratio bin [k * width, (k + 1) * width).
  std::map<std::string, std::vector<std::size_t>> histogram;
};

// Groups by (origin zone, destination zone, mode) and keeps groups with more
// than min_n observations.
dispersion_report travel_time_dispersion(std::span<time_observation const> obs,
                                         std::size_t min_n = 5);

struct zone_share {
  std::string zone;
  std::size_t transit{0};
  std::size_t total{0};
  double share() const {
    return total == 0 ? 0.0 : static_cast<double>(transit) / total;
  }
};

std::vector<zone_share> ridership_by_zone(population const& pop);

}  // namespace mclab
