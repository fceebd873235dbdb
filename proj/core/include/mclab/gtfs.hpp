#pragma once

#include <bitset>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mclab/geo.hpp"
#include "mclab/region.hpp"
#include "mclab/time.hpp"

namespace mclab::gtfs {

struct stop {
  std::string id;
  std::string name;
  geo_point pos;
  friend bool operator==(stop const&, stop const&) = default;
};

struct route {
  std::string id;
  int type{3};
  friend bool operator==(route const&, route const&) = default;
};

struct trip {
  std::string id;
  std::uint32_t route{0};
  std::uint32_t service{0};
  friend bool operator==(trip const&, trip const&) = default;
};

struct stop_time {
  std::uint32_t trip{0};
  std::uint32_t stop{0};
  std::int32_t arrival{0};    // seconds after service-day midnight
  std::int32_t departure{0};
  std::uint32_t sequence{0};
  friend bool operator==(stop_time const&, stop_time const&) = default;
};

struct service {
  std::string id;
  std::bitset<7> weekdays;  // bit 0 = Monday
  date start;
  date end;
  friend bool operator==(service const&, service const&) = default;
};

// Parsed schedule of a single agency. Stops, routes, trips and services are
// sorted by id; stop_times by (trip, sequence). Immutable after parse.
class feed {
public:
  std::string agency;
  std::vector<stop> stops;
  std::vector<route> routes;
  std::vector<trip> trips;
  std::vector<stop_time> stop_times;
  std::vector<service> services;
  std::optional<fare_rule> fares;
  // Rows dropped while parsing, keyed by file name.
  std::map<std::string, std::size_t> rejected;

  std::optional<std::uint32_t> stop_index(std::string_view id) const;
  std::optional<std::uint32_t> trip_index(std::string_view id) const;
  std::optional<std::uint32_t> service_index(std::string_view id) const;

  // stop_times of one trip, in sequence order.
  std::pair<std::size_t, std::size_t> trip_range(std::uint32_t trip) const {
    return trip_ranges_[trip];
  }
  // Indices into stop_times at a stop, ascending by departure.
  std::vector<std::uint32_t> const& stop_events(std::uint32_t stop) const {
    return stop_events_[stop];
  }

  bool active_on(std::uint32_t service, date d) const;

  // Rebuilds lookup tables; called by the parser.
  void finalize();

  friend bool operator==(feed const& a, feed const& b) {
    return a.agency == b.agency && a.stops == b.stops &&
           a.routes == b.routes && a.trips == b.trips &&
           a.stop_times == b.stop_times && a.services == b.services &&
           a.fares == b.fares;
  }

private:
  std::unordered_map<std::string, std::uint32_t> stop_lookup_;
  std::unordered_map<std::string, std::uint32_t> trip_lookup_;
  std::unordered_map<std::string, std::uint32_t> service_lookup_;
  std::vector<std::pair<std::size_t, std::size_t>> trip_ranges_;
  std::vector<std::vector<std::uint32_t>> stop_events_;
};

// File name -> contents. Lets tests build feeds without touching disk.
using file_map = std::map<std::string, std::string>;

// Requires stops.txt, routes.txt, trips.txt, stop_times.txt and calendar.txt.
// fare_attributes.txt (price, transfer_duration and an optional
// transfer_price column) and fare_distance_bands.txt (max_miles, price) are
// optional. Unparseable or dangling rows are dropped and counted in
// feed::rejected. Throws feed_error on a missing file, duplicate key, or a
// calendar without rows.
feed parse_feed(file_map const& files, std::string agency);
feed parse_feed(std::string const& directory, std::string agency);

// Writes the retained fields back as GTFS text files.
file_map serialize_feed(feed const& f);
void write_feed(feed const& f, std::string const& directory);

// Throws key_error for an unknown service id.
bool service_active(feed const& f, std::string_view service_id, date d);

struct stop_hit {
  std::uint32_t stop{0};
  double distance_miles{0.0};
  friend bool operator==(stop_hit const&, stop_hit const&) = default;
};

// Stops within `radius_miles` (inclusive) of the point, nearest first, ties by
// stop id. Throws domain_error for a negative radius.
std::vector<stop_hit> stops_within(feed const& f, geo_point const& p,
                                   double radius_miles);

struct departure {
  std::uint32_t trip{0};
  std::uint32_t route{0};
  std::uint32_t stop{0};
  time_stamp at;
  friend bool operator==(departure const&, departure const&) = default;
};

// Departures from the stop inside the closed window [from, to] whose service
// runs on the departure's service day. Service days starting the day before
// `from` are considered so after-midnight trips are found. Sorted by time,
// then trip id. Throws key_error for an unknown stop and domain_error when
// to < from.
std::vector<departure> departures(feed const& f, std::string_view stop_id,
                                  time_stamp from, time_stamp to);

// Callback form used by the router: visits departures at a stop index whose
// absolute departure lies in [from_abs, to_abs], in no particular order
// across service days. The callback gets the stop_time index and the absolute
// departure time in seconds.
void for_each_departure(
    feed const& f, std::uint32_t stop, std::int64_t from_abs,
    std::int64_t to_abs,
    std::function<void(std::uint32_t, std::int64_t)> const& visit);

}  // namespace mclab::gtfs
