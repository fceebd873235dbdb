#include "mclab/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <numbers>

#include "mclab/error.hpp"

namespace mclab {

geo_point make_point(double lat, double lon, std::optional<std::string> zone) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || std::abs(lat) > 90.0 ||
      std::abs(lon) > 180.0) {
    throw domain_error{"coordinate out of range: (" + std::to_string(lat) +
                       ", " + std::to_string(lon) + ")"};
  }
  return geo_point{lat, lon, std::move(zone)};
}

double haversine_miles(geo_point const& a, geo_point const& b) {
  constexpr auto kRad = std::numbers::pi / 180.0;
  auto const dlat = (b.lat - a.lat) * kRad;
  auto const dlon = (b.lon - a.lon) * kRad;
  auto const s1 = std::sin(dlat / 2.0);
  auto const s2 = std::sin(dlon / 2.0);
  auto const h =
      s1 * s1 + std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace mclab
