#include "mclab/survey.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <string>

#include "mclab/csv.hpp"
#include "mclab/error.hpp"

namespace mclab {

namespace {

std::string const& field(std::vector<std::string> const& row, std::size_t i) {
  static std::string const kEmpty;
  return i < row.size() ? row[i] : kEmpty;
}

std::optional<std::uint64_t> parse_id(std::string const& s) {
  auto const v = csv::to_int(s);
  if (!v || *v < 0) {
    return std::nullopt;
  }
  return static_cast<std::uint64_t>(*v);
}

std::optional<bool> parse_flag(std::string const& s) {
  if (s == "1" || s == "Y" || s == "y" || s == "true" || s == "TRUE") {
    return true;
  }
  if (s == "0" || s == "N" || s == "n" || s == "false" || s == "FALSE") {
    return false;
  }
  return std::nullopt;
}

std::optional<std::string> zone_of(std::string const& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>{s};
}

bool valid_coordinate(double lat, double lon) {
  return std::abs(lat) <= 90.0 && std::abs(lon) <= 180.0;
}

template <typename T, typename Id>
void sort_by_id(std::vector<T>& v, Id T::*member) {
  std::sort(v.begin(), v.end(), [&](T const& a, T const& b) {
    return to_int(a.*member) < to_int(b.*member);
  });
}

}  // namespace

std::string_view name_of(purpose p) {
  switch (p) {
    case purpose::work: return "Work";
    case purpose::shop: return "Shop";
    case purpose::return_home: return "ReturnHome";
    case purpose::other: return "Other";
  }
  return "Other";
}

std::optional<purpose> parse_purpose(std::string_view s) {
  std::string lower;
  for (auto const c : s) {
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "work") return purpose::work;
  if (lower == "shop") return purpose::shop;
  if (lower == "returnhome") return purpose::return_home;
  if (lower == "other") return purpose::other;
  return std::nullopt;
}

std::size_t rejection_report::total_trips_rejected() const {
  return std::accumulate(trips.begin(), trips.end(), std::size_t{0},
                         [](auto acc, auto const& kv) { return acc + kv.second; });
}

void population::reindex() {
  household_index_.clear();
  person_index_.clear();
  trip_index_.clear();
  tour_index_.clear();
  members_.clear();
  for (auto i = 0U; i != households.size(); ++i) {
    household_index_[to_int(households[i].id)] = i;
  }
  for (auto i = 0U; i != persons.size(); ++i) {
    person_index_[to_int(persons[i].id)] = i;
    members_[to_int(persons[i].household)].push_back(persons[i].id);
  }
  for (auto i = 0U; i != trips.size(); ++i) {
    trip_index_[to_int(trips[i].id)] = i;
  }
  for (auto i = 0U; i != tours.size(); ++i) {
    tour_index_[to_int(tours[i].id)] = i;
  }
}

household const* population::find_household(household_id id) const {
  auto const it = household_index_.find(to_int(id));
  return it == household_index_.end() ? nullptr : &households[it->second];
}

person const* population::find_person(person_id id) const {
  auto const it = person_index_.find(to_int(id));
  return it == person_index_.end() ? nullptr : &persons[it->second];
}

trip const* population::find_trip(trip_id id) const {
  auto const it = trip_index_.find(to_int(id));
  return it == trip_index_.end() ? nullptr : &trips[it->second];
}

household const& population::household_of(household_id id) const {
  if (auto const* h = find_household(id)) {
    return *h;
  }
  throw key_error{"unknown household " + std::to_string(to_int(id))};
}

person const& population::person_of(person_id id) const {
  if (auto const* p = find_person(id)) {
    return *p;
  }
  throw key_error{"unknown person " + std::to_string(to_int(id))};
}

trip const& population::trip_of(trip_id id) const {
  if (auto const* t = find_trip(id)) {
    return *t;
  }
  throw key_error{"unknown trip " + std::to_string(to_int(id))};
}

tour const& population::tour_of(tour_id id) const {
  auto const it = tour_index_.find(to_int(id));
  if (it == tour_index_.end()) {
    throw key_error{"unknown tour " + std::to_string(to_int(id))};
  }
  return tours[it->second];
}

std::vector<trip> population::legs_of(tour const& t) const {
  std::vector<trip> legs;
  legs.reserve(t.trips.size());
  for (auto const id : t.trips) {
    legs.push_back(trip_of(id));
  }
  return legs;
}

std::vector<person_id> const& population::members_of(household_id id) const {
  static std::vector<person_id> const kNone;
  auto const it = members_.find(to_int(id));
  return it == members_.end() ? kNone : it->second;
}

population parse_survey(std::string const& household_file,
                        std::string const& person_file,
                        std::string const& trip_file) {
  population pop;
  auto& rej = pop.rejections;

  // Households
  {
    auto const t = csv::read_file(household_file);
    auto const c = csv::require_columns(
        t,
        {"hh_id", "home_lat", "home_lon", "home_zone", "n_members",
         "n_vehicles", "income"},
        "household.csv");
    std::set<std::uint64_t> seen;
    for (auto const& row : t.rows) {
      ++rej.households_read;
      auto const id = parse_id(field(row, c[0]));
      if (field(row, c[1]).empty() || field(row, c[2]).empty()) {
        ++rej.households["missing_coordinates"];
        continue;
      }
      auto const lat = csv::to_double(field(row, c[1]));
      auto const lon = csv::to_double(field(row, c[2]));
      auto const members = csv::to_int(field(row, c[4]));
      auto const vehicles = csv::to_int(field(row, c[5]));
      auto const income = csv::to_double(field(row, c[6]));
      if (!id || !lat || !lon || !members || !vehicles || !income) {
        ++rej.households["malformed"];
        continue;
      }
      if (!valid_coordinate(*lat, *lon) || *members < 1 || *vehicles < 0 ||
          *income < 0.0) {
        ++rej.households["invalid_value"];
        continue;
      }
      if (!seen.insert(*id).second) {
        ++rej.households["duplicate_id"];
        continue;
      }
      pop.households.push_back(household{
          household_id{*id}, geo_point{*lat, *lon, zone_of(field(row, c[3]))},
          static_cast<std::uint32_t>(*members),
          static_cast<std::uint32_t>(*vehicles), *income});
    }
  }

  // Persons
  {
    auto const t = csv::read_file(person_file);
    auto const c =
        csv::require_columns(t, {"person_id", "hh_id", "age", "female"},
                             "person.csv");
    std::set<std::uint64_t> households;
    for (auto const& h : pop.households) {
      households.insert(to_int(h.id));
    }
    std::set<std::uint64_t> seen;
    for (auto const& row : t.rows) {
      ++rej.persons_read;
      auto const id = parse_id(field(row, c[0]));
      auto const hh = parse_id(field(row, c[1]));
      auto const age = csv::to_double(field(row, c[2]));
      auto const female = parse_flag(field(row, c[3]));
      if (!id || !hh || !age || !female) {
        ++rej.persons["malformed"];
        continue;
      }
      if (*age < 0.0) {
        ++rej.persons["invalid_value"];
        continue;
      }
      if (!households.contains(*hh)) {
        ++rej.persons["dangling_household"];
        continue;
      }
      if (!seen.insert(*id).second) {
        ++rej.persons["duplicate_id"];
        continue;
      }
      pop.persons.push_back(
          person{person_id{*id}, household_id{*hh}, *age, *female});
    }
  }

  // Trips
  {
    auto const t = csv::read_file(trip_file);
    auto const c = csv::require_columns(
        t,
        {"trip_id", "person_id", "o_lat", "o_lon", "o_zone", "d_lat", "d_lon",
         "d_zone", "depart_date", "depart_sec", "arrive_sec", "mode",
         "purpose"},
        "trip.csv");
    std::set<std::uint64_t> persons;
    for (auto const& p : pop.persons) {
      persons.insert(to_int(p.id));
    }
    std::set<std::uint64_t> seen;
    for (auto const& row : t.rows) {
      ++rej.trips_read;
      auto const id = parse_id(field(row, c[0]));
      auto const pid = parse_id(field(row, c[1]));
      if (field(row, c[2]).empty() || field(row, c[3]).empty() ||
          field(row, c[5]).empty() || field(row, c[6]).empty()) {
        ++rej.trips["missing_coordinates"];
        continue;
      }
      auto const olat = csv::to_double(field(row, c[2]));
      auto const olon = csv::to_double(field(row, c[3]));
      auto const dlat = csv::to_double(field(row, c[5]));
      auto const dlon = csv::to_double(field(row, c[6]));
      auto const dep = csv::to_int(field(row, c[9]));
      auto const arr = csv::to_int(field(row, c[10]));
      auto const purp = parse_purpose(field(row, c[12]));
      std::optional<date> day;
      try {
        day = parse_date(field(row, c[8]));
      } catch (domain_error const&) {
      }
      if (!id || !pid || !olat || !olon || !dlat || !dlon || !dep || !arr ||
          !purp || !day) {
        ++rej.trips["malformed"];
        continue;
      }
      if (!valid_coordinate(*olat, *olon) || !valid_coordinate(*dlat, *dlon) ||
          *dep < 0 || *arr >= kMaxSecondsOfDay) {
        ++rej.trips["invalid_value"];
        continue;
      }
      if (*arr <= *dep) {
        ++rej.trips["non_positive_duration"];
        continue;
      }
      std::optional<raw_mode> observed;
      try {
        observed = parse_raw_mode(field(row, c[11]));
      } catch (unrecognized_mode const&) {
        ++rej.trips["unrecognized_mode"];
        continue;
      }
      if (!persons.contains(*pid)) {
        ++rej.trips["dangling_person"];
        continue;
      }
      if (!seen.insert(*id).second) {
        ++rej.trips["duplicate_id"];
        continue;
      }
      trip tr;
      tr.id = trip_id{*id};
      tr.person = person_id{*pid};
      tr.origin = geo_point{*olat, *olon, zone_of(field(row, c[4]))};
      tr.destination = geo_point{*dlat, *dlon, zone_of(field(row, c[7]))};
      tr.depart = time_stamp{*day, static_cast<std::int32_t>(*dep)};
      tr.arrive = time_stamp{*day, static_cast<std::int32_t>(*arr)};
      tr.observed_mode = *observed;
      tr.trip_purpose = *purp;
      pop.trips.push_back(std::move(tr));
    }
  }

  sort_by_id(pop.households, &household::id);
  sort_by_id(pop.persons, &person::id);
  sort_by_id(pop.trips, &trip::id);
  pop.reindex();
  return pop;
}

population build_tours(population pop, double chain_tolerance_meters) {
  auto const tol_mi = chain_tolerance_meters / kMetersPerMile;

  std::map<std::uint64_t, std::vector<std::size_t>> by_person;
  for (auto i = 0U; i != pop.trips.size(); ++i) {
    auto& t = pop.trips[i];
    t.tour.reset();
    t.leg_index.reset();
    by_person[to_int(t.person)].push_back(i);
  }
  pop.tours.clear();

  std::vector<bool> keep(pop.trips.size(), true);
  auto next_tour = std::uint64_t{1};

  for (auto& [pid, idx] : by_person) {
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      auto const& x = pop.trips[a];
      auto const& y = pop.trips[b];
      return x.depart != y.depart ? x.depart < y.depart
                                  : to_int(x.id) < to_int(y.id);
    });

    // Overlapping trips: the later one goes.
    std::vector<std::size_t> kept;
    for (auto const i : idx) {
      if (!kept.empty() && pop.trips[i].depart < pop.trips[kept.back()].arrive) {
        keep[i] = false;
        ++pop.rejections.trips["overlap"];
        continue;
      }
      kept.push_back(i);
    }

    auto const& home =
        pop.household_of(pop.person_of(person_id{pid}).household).home;
    std::optional<tour> current;
    geo_point prev_dest;
    auto const close = [&]() {
      pop.tours.push_back(std::move(*current));
      current.reset();
    };

    for (auto const i : kept) {
      auto& t = pop.trips[i];
      if (current &&
          haversine_miles(prev_dest, t.origin) > tol_mi) {
        close();
      }
      if (!current) {
        current = tour{};
        current->id = tour_id{next_tour++};
        current->person = t.person;
        current->starts_at_home = haversine_miles(t.origin, home) <= tol_mi;
      }
      t.tour = current->id;
      t.leg_index = static_cast<std::uint32_t>(current->trips.size());
      current->trips.push_back(t.id);
      prev_dest = t.destination;
      if (haversine_miles(t.destination, home) <= tol_mi) {
        t.trip_purpose = purpose::return_home;
        current->returns_home = true;
        close();
      }
    }
    if (current) {
      close();
    }
  }

  std::vector<trip> retained;
  retained.reserve(pop.trips.size());
  for (auto i = 0U; i != pop.trips.size(); ++i) {
    if (keep[i]) {
      retained.push_back(std::move(pop.trips[i]));
    }
  }
  pop.trips = std::move(retained);
  sort_by_id(pop.tours, &tour::id);
  pop.reindex();
  return pop;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

split_bucket split_assignment::bucket_of(household_id id) const {
  auto const it = buckets.find(id);
  if (it == buckets.end()) {
    throw key_error{"household " + std::to_string(to_int(id)) +
                    " is not in the split"};
  }
  return it->second;
}

std::size_t split_assignment::count(split_bucket b) const {
  return static_cast<std::size_t>(
      std::count_if(buckets.begin(), buckets.end(),
                    [&](auto const& kv) { return kv.second == b; }));
}

split_assignment split_train_test(population const& pop,
                                  double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw domain_error{"train fraction must lie in (0, 1), got " +
                       std::to_string(train_fraction)};
  }
  auto const salt = mix64(seed);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranked;
  ranked.reserve(pop.households.size());
  for (auto const& h : pop.households) {
    ranked.emplace_back(mix64(salt ^ to_int(h.id)), to_int(h.id));
  }
  std::sort(ranked.begin(), ranked.end());

  auto const n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(ranked.size())));
  split_assignment out;
  for (auto i = 0U; i != ranked.size(); ++i) {
    out.buckets[household_id{ranked[i].second}] =
        i < n_train ? split_bucket::train : split_bucket::test;
  }
  return out;
}

}  // namespace mclab
