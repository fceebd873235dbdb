#include "mclab/choiceset.hpp"

#include <algorithm>
#include <string>

#include "mclab/error.hpp"

namespace mclab {

std::uint32_t vehicle_timeline::away_at(std::int64_t t,
                                        std::optional<person_id> excluded) const {
  auto n = std::uint32_t{0};
  for (auto const& iv : intervals) {
    if (iv.start <= t && t <= iv.end && iv.person != excluded) {
      ++n;
    }
  }
  return n;
}

std::size_t vehicle_timeline::overruns() const {
  return static_cast<std::size_t>(std::count_if(
      intervals.begin(), intervals.end(), [](auto const& iv) { return iv.overrun; }));
}

vehicle_timeline vehicle_usage_timeline(household const& h,
                                        std::span<tour const> tours,
                                        population const& pop) {
  vehicle_timeline tl;
  tl.household = h.id;
  tl.n_vehicles = h.n_vehicles;
  for (auto const& tr : tours) {
    if (tr.trips.empty()) {
      continue;
    }
    auto const& first = pop.trip_of(tr.trips.front());
    if (map_survey_mode(first.observed_mode) != mode::drive) {
      continue;
    }
    auto const& last = pop.trip_of(tr.trips.back());
    auto end = last.arrive.absolute();
    if (!tr.returns_home) {
      auto const day_end =
          (day_number(first.depart.normalized().day()) + 1) * kSecondsPerDay;
      end = std::max(end, day_end);
    }
    tl.intervals.push_back(
        busy_interval{tr.person, tr.id, first.depart.absolute(), end, 0, false});
  }
  std::sort(tl.intervals.begin(), tl.intervals.end(),
            [](busy_interval const& a, busy_interval const& b) {
              return std::tie(a.start, a.person, a.tour) <
                     std::tie(b.start, b.person, b.tour);
            });

  // The count of intervals covering a point only rises at interval starts,
  // so the peak over [s, e] is attained at s or at a start inside it.
  for (auto& iv : tl.intervals) {
    auto peak = tl.away_at(iv.start);
    for (auto const& other : tl.intervals) {
      if (other.start > iv.start && other.start <= iv.end) {
        peak = std::max(peak, tl.away_at(other.start));
      }
    }
    iv.peak_away = peak;
    iv.overrun = peak > h.n_vehicles;
  }
  return tl;
}

std::map<household_id, vehicle_timeline> build_timelines(population const& pop) {
  std::map<household_id, std::vector<tour>> by_household;
  for (auto const& tr : pop.tours) {
    by_household[pop.person_of(tr.person).household].push_back(tr);
  }
  std::map<household_id, vehicle_timeline> out;
  for (auto const& h : pop.households) {
    auto const it = by_household.find(h.id);
    out[h.id] = it == by_household.end()
                    ? vehicle_usage_timeline(h, {}, pop)
                    : vehicle_usage_timeline(h, it->second, pop);
  }
  return out;
}

bool drive_available(person_id who, time_stamp depart,
                     vehicle_timeline const& timeline, household const& h) {
  if (h.n_vehicles == 0) {
    return false;
  }
  return timeline.away_at(depart.absolute(), who) < h.n_vehicles;
}

std::string_view name_of(constraint_rule r) {
  switch (r) {
    case constraint_rule::no_service: return "NoService";
    case constraint_rule::vehicle_in_use: return "VehicleInUse";
    case constraint_rule::tour_lock: return "TourLock";
  }
  return "NoService";
}

mode_set tour_mode_constraint(tour const& t, std::size_t leg_index,
                              std::span<std::optional<mode> const> prior_modes) {
  if (leg_index >= t.trips.size()) {
    throw consistency_error{"leg " + std::to_string(leg_index) +
                            " out of range for tour " +
                            std::to_string(to_int(t.id)) + " with " +
                            std::to_string(t.trips.size()) + " legs"};
  }
  mode_set allowed;
  allowed.set();
  if (leg_index == 0) {
    return allowed;
  }
  if (prior_modes.empty()) {
    throw consistency_error{"mode of the first leg of tour " +
                            std::to_string(to_int(t.id)) + " is required"};
  }
  if (prior_modes.front() == mode::drive) {
    allowed.reset();
    allowed.set(index_of(mode::drive));
    auto const return_home = t.returns_home && leg_index + 1 == t.trips.size();
    if (!return_home) {
      allowed.set(index_of(mode::passenger));
    }
    return allowed;
  }
  allowed.reset(index_of(mode::drive));
  return allowed;
}

choice_set form_choice_set(trip const& t, alternative_set const& alternatives,
                           context_flags const& flags,
                           vehicle_timeline const& timeline,
                           household const& h, tour const& tr,
                           std::span<std::optional<mode> const> prior_modes) {
  if (t.tour != tr.id || !t.leg_index) {
    throw consistency_error{"trip " + std::to_string(to_int(t.id)) +
                            " is not a leg of tour " +
                            std::to_string(to_int(tr.id))};
  }

  choice_set cs;
  cs.trip = t.id;
  cs.alternatives = alternatives;
  cs.flags = flags;
  for (auto const m : kAllModes) {
    if (alternatives[index_of(m)].m != m) {
      throw consistency_error{"alternatives of trip " +
                              std::to_string(to_int(t.id)) +
                              " are not in canonical order"};
    }
    cs.service.set(index_of(m), alternatives[index_of(m)].available);
  }
  cs.available = cs.service;

  for (auto const m : kAllModes) {
    if (!cs.service.test(index_of(m))) {
      cs.log.push_back({constraint_rule::no_service, m});
    }
  }

  auto const drive = index_of(mode::drive);
  if (cs.available.test(drive) &&
      !drive_available(t.person, t.depart, timeline, h)) {
    cs.available.reset(drive);
    cs.log.push_back({constraint_rule::vehicle_in_use, mode::drive});
  }

  auto const allowed = tour_mode_constraint(tr, *t.leg_index, prior_modes);
  for (auto const m : kAllModes) {
    if (cs.available.test(index_of(m)) && !allowed.test(index_of(m))) {
      cs.available.reset(index_of(m));
      cs.log.push_back({constraint_rule::tour_lock, m});
    }
  }

  cs.chosen = map_survey_mode(t.observed_mode);
  if (cs.chosen && !cs.available.test(index_of(*cs.chosen))) {
    auto const it = std::find_if(cs.log.begin(), cs.log.end(),
                                 [&](auto const& e) { return e.m == *cs.chosen; });
    cs.repairs.push_back(*it);
    cs.log.erase(it);
    cs.available.set(index_of(*cs.chosen));
  }

  if (cs.available.none()) {
    std::vector<std::string> entries;
    for (auto const& e : cs.log) {
      entries.push_back(std::string{name_of(e.rule)} + ":" +
                        std::string{name_of(e.m)});
    }
    throw degenerate_choice_set{
        "every alternative of trip " + std::to_string(to_int(t.id)) +
            " was removed",
        std::move(entries)};
  }
  return cs;
}

}  // namespace mclab
