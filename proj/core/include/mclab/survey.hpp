#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mclab/types.hpp"

namespace mclab {

// Dropped rows per file, keyed by reason.
struct rejection_report {
  std::map<std::string, std::size_t> households;
  std::map<std::string, std::size_t> persons;
  std::map<std::string, std::size_t> trips;

  std::size_t households_read{0};
  std::size_t persons_read{0};
  std::size_t trips_read{0};

  std::size_t total_trips_rejected() const;
};

// Households, persons, trips and tours with referential links. Collections
// are sorted by id; lookups go through the index maps.
class population {
public:
  std::vector<household> households;
  std::vector<person> persons;
  std::vector<trip> trips;
  std::vector<tour> tours;
  rejection_report rejections;

  // Must be called after any of the collections changed.
  void reindex();

  household const& household_of(household_id id) const;
  person const& person_of(person_id id) const;
  trip const& trip_of(trip_id id) const;
  tour const& tour_of(tour_id id) const;

  household const* find_household(household_id id) const;
  person const* find_person(person_id id) const;
  trip const* find_trip(trip_id id) const;

  // The tour's legs in order (copies).
  std::vector<trip> legs_of(tour const& t) const;

  // Persons of a household, ascending id.
  std::vector<person_id> const& members_of(household_id id) const;

  friend bool operator==(population const& a, population const& b) {
    return a.households == b.households && a.persons == b.persons &&
           a.trips == b.trips && a.tours == b.tours;
  }

private:
  std::unordered_map<std::uint64_t, std::size_t> household_index_;
  std::unordered_map<std::uint64_t, std::size_t> person_index_;
  std::unordered_map<std::uint64_t, std::size_t> trip_index_;
  std::unordered_map<std::uint64_t, std::size_t> tour_index_;
  std::unordered_map<std::uint64_t, std::vector<person_id>> members_;
};

// Reads household.csv, person.csv and trip.csv. Rows with missing
// coordinates, non-positive durations, unparseable fields or dangling keys
// are dropped and counted in population::rejections. Throws schema_error on
// a header lacking required columns and io_error on unreadable files.
population parse_survey(std::string const& household_file,
                        std::string const& person_file,
                        std::string const& trip_file);

inline constexpr double kDefaultChainToleranceMeters = 300.0;

// Chains each person's trips into home based tours. A tour closes when a
// leg ends within the tolerance of home; legs ending at home get purpose
// ReturnHome. Chains that never return home, or do not start there, become
// incomplete tours. A trip departing before the previous one arrived is
// dropped and counted under trips["overlap"].
population build_tours(population pop,
                       double chain_tolerance_meters =
                           kDefaultChainToleranceMeters);

enum class split_bucket : std::uint8_t { train, test };

struct split_assignment {
  std::map<household_id, split_bucket> buckets;

  split_bucket bucket_of(household_id id) const;
  std::size_t count(split_bucket b) const;
};

// Household level split: households are ranked by a seeded hash of their id
// and the first round(train_fraction * n) go to Train. Throws domain_error
// unless 0 < train_fraction < 1.
split_assignment split_train_test(population const& pop, double train_fraction,
                                  std::uint64_t seed);

// splitmix64 finalizer, shared by the seeded components.
std::uint64_t mix64(std::uint64_t x);

}  // namespace mclab
