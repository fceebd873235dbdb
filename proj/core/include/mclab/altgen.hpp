#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mclab/gtfs.hpp"
#include "mclab/mode.hpp"
#include "mclab/region.hpp"
#include "mclab/types.hpp"

namespace mclab {

// One candidate mode for one trip. Attributes are meaningful only when
// available; times are hours, distances miles, fares dollars (gas cost for
// Drive and Passenger).
struct alternative {
  mode m{mode::walk};
  bool available{false};
  double time_h{0.0};
  double access_mi{0.0};
  double egress_mi{0.0};
  std::uint32_t transfers{0};
  double fare{0.0};

  friend bool operator==(alternative const&, alternative const&) = default;
};

using alternative_set = std::array<alternative, kModeCount>;

struct altgen_config {
  double walk_speed_mph{3.0};
  double bike_speed_mph{10.0};
  double drive_speed_mph{25.0};
  double detour_factor{1.3};
  double gas_cost_per_mile{0.15};

  double walk_access_radius_mi{1.0};
  double drive_access_radius_mi{10.0};
  // Per-agency override of the walk access/egress radius.
  std::map<std::string, double> walk_radius_by_agency;

  std::int32_t search_window_sec{3600};

  std::string cta_agency{"CTA"};
  std::string pace_agency{"Pace"};
  std::string rail_agency{"Metra"};

  double walk_radius_for(std::string const& agency) const;
};

// Missing keys keep defaults; throws config_error on bad values (detour < 1,
// non-positive speeds, negative radii).
altgen_config altgen_config_from_json(nlohmann::json const& j);
nlohmann::json to_json(altgen_config const& cfg);

// Walk, Bike or Drive over the crow-fly distance stretched by the detour
// factor. Always available; Drive availability is decided by the constraint
// engine. Throws domain_error for transit modes.
alternative route_street(mode m, geo_point const& o, geo_point const& d,
                         altgen_config const& cfg);

using feed_set = std::map<std::string, gtfs::feed>;

struct transit_leg {
  std::string agency;
  std::string route;
  std::string board_stop;
  std::string alight_stop;
  time_stamp board;
  time_stamp alight;
  double ride_mi{0.0};  // crow-fly between the two stops

  friend bool operator==(transit_leg const&, transit_leg const&) = default;
};

struct transit_itinerary {
  std::string agency;
  std::vector<transit_leg> legs;
  double access_mi{0.0};
  double egress_mi{0.0};
  std::uint32_t transfers{0};
  // From the trip's departure to the final alighting (access drive, waits
  // and rides included).
  double total_time_h{0.0};
  // Drive access leg, zero for walk access.
  double access_drive_time_h{0.0};
  double access_gas_cost{0.0};

  std::string const& board_stop() const { return legs.front().board_stop; }
  std::string const& alight_stop() const { return legs.back().alight_stop; }
};

enum class access_class : std::uint8_t { walk, drive };

// Earliest arrival itinerary with at most one transfer (same stop) inside the
// agency's feed. Boarding stops lie within the access radius of `o`,
// alighting stops within the walk radius of `d`; the first boarding happens
// within the search window after the traveller can reach the stop. Ties go
// to fewer transfers, then shorter access distance. nullopt when no such
// itinerary exists. Throws config_error for an agency without a feed.
std::optional<transit_itinerary> route_transit(feed_set const& feeds,
                                               std::string const& agency,
                                               geo_point const& o,
                                               geo_point const& d,
                                               time_stamp depart,
                                               altgen_config const& cfg,
                                               access_class access =
                                                   access_class::walk);

// The first leg pays its agency's base fare; a later leg of the same agency
// boarded within the transfer window of the last full fare pays the transfer
// fare, otherwise a full base fare. Legs of different agencies are priced by
// their own rules and summed. Feed fares take precedence over the fallback
// fares in the region configuration.
double compute_fare(transit_itinerary const& itin, feed_set const& feeds,
                    region_config const& region);

struct cache_key {
  double o_lat{0.0};
  double o_lon{0.0};
  double d_lat{0.0};
  double d_lon{0.0};
  mode m{mode::walk};
  std::int64_t minute{0};  // absolute minutes, nearest

  friend auto operator<=>(cache_key const&, cache_key const&) = default;
};

cache_key make_cache_key(geo_point const& o, geo_point const& d, mode m,
                         time_stamp depart);

// Recorded routing answers, replayed instead of querying a live service.
class routing_cache {
public:
  // One JSON object per line; unknown keys are ignored. Throws io_error /
  // schema_error.
  static routing_cache load(std::string const& path);
  static routing_cache parse(std::string const& jsonl);

  void insert(cache_key const& key, alternative const& attrs);
  std::optional<alternative> find(cache_key const& key) const;
  std::size_t size() const { return entries_.size(); }

  std::string to_jsonl() const;

private:
  std::map<cache_key, alternative> entries_;
};

std::string cache_line(geo_point const& o, geo_point const& d,
                       time_stamp depart, alternative const& a);

// The eight alternatives of a trip in canonical order. The cache is consulted
// first per mode; the routers fill the rest. Passenger copies Drive's
// attributes. Zero-distance trips get every transit alternative marked
// unavailable.
alternative_set generate_alternatives(trip const& t, feed_set const& feeds,
                                      routing_cache const* cache,
                                      altgen_config const& cfg,
                                      region_config const& region);

}  // namespace mclab
