#pragma once

#include <optional>
#include <string>

namespace mclab {

struct geo_point {
  double lat{0.0};
  double lon{0.0};
  std::optional<std::string> zone;

  friend bool operator==(geo_point const&, geo_point const&) = default;
};

// Validating constructor; throws domain_error when |lat| > 90 or |lon| > 180.
geo_point make_point(double lat, double lon,
                     std::optional<std::string> zone = std::nullopt);

inline constexpr double kEarthRadiusMiles = 3958.7613;
inline constexpr double kMetersPerMile = 1609.344;

// Great-circle distance in miles.
double haversine_miles(geo_point const& a, geo_point const& b);

}  // namespace mclab
