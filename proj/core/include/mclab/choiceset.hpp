#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mclab/altgen.hpp"
#include "mclab/region.hpp"
#include "mclab/survey.hpp"

namespace mclab {

// A household vehicle away from home for the whole of a Drive tour.
struct busy_interval {
  person_id person{};
  tour_id tour{};
  std::int64_t start{0};  // absolute seconds, closed interval
  std::int64_t end{0};
  // Most vehicles simultaneously away at any instant of this interval,
  // counting this one.
  std::uint32_t peak_away{0};
  bool overrun{false};  // peak_away > household vehicles

  friend bool operator==(busy_interval const&, busy_interval const&) = default;
};

struct vehicle_timeline {
  household_id household{};
  std::uint32_t n_vehicles{0};
  std::vector<busy_interval> intervals;  // by start, then person

  // Vehicles away at instant t, ignoring intervals of `excluded`.
  std::uint32_t away_at(std::int64_t t,
                        std::optional<person_id> excluded = std::nullopt) const;
  std::size_t overruns() const;
};

// One interval per member tour whose first leg was driven: from that leg's
// departure to the last leg's arrival, or to the end of the departure day
// for tours that never return home.
vehicle_timeline vehicle_usage_timeline(household const& h,
                                        std::span<tour const> tours,
                                        population const& pop);

std::map<household_id, vehicle_timeline> build_timelines(
    population const& pop);

// False iff vehicles away with other members at `depart` >= n_vehicles.
bool drive_available(person_id who, time_stamp depart,
                     vehicle_timeline const& timeline, household const& h);

enum class constraint_rule : std::uint8_t { no_service, vehicle_in_use, tour_lock };

std::string_view name_of(constraint_rule r);

struct constraint_entry {
  constraint_rule rule{constraint_rule::no_service};
  mode m{mode::walk};
  friend bool operator==(constraint_entry const&, constraint_entry const&) =
      default;
};

// Modes allowed on a leg given the modes of the earlier legs. Leg 0 allows
// everything. Later legs of a tour whose first leg was not driven exclude
// Drive; if it was driven, the return-home leg allows only Drive and other
// legs Drive or Passenger. Throws consistency_error for a leg index outside
// the tour or missing prior modes.
mode_set tour_mode_constraint(tour const& t, std::size_t leg_index,
                              std::span<std::optional<mode> const> prior_modes);

struct choice_set {
  trip_id trip{};
  alternative_set alternatives{};
  mode_set available;   // after constraints and repair
  mode_set service;     // router availability only
  std::optional<mode> chosen;
  context_flags flags;
  std::vector<constraint_entry> log;      // removals that stand
  std::vector<constraint_entry> repairs;  // removals undone for the chosen mode

  friend bool operator==(choice_set const&, choice_set const&) = default;
};

// Applies NoService, VehicleInUse (Drive only) and TourLock in that order;
// each removed alternative is logged under the first rule that removed it.
// If the observed mode was removed it is put back and the entry moves to
// `repairs`. Throws degenerate_choice_set when nothing is left.
choice_set form_choice_set(trip const& t, alternative_set const& alternatives,
                           context_flags const& flags,
                           vehicle_timeline const& timeline,
                           household const& h, tour const& tr,
                           std::span<std::optional<mode> const> prior_modes);

}  // namespace mclab
