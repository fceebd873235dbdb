#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mclab/mode.hpp"

namespace mclab {

// Explanatory variables of the utility functions. Units: hours, miles,
// dollars; income enters in units of 100,000 dollars.
enum class variable : std::uint8_t {
  travel_time,
  household_members,
  household_vehicles,
  female,
  transfers,
  income,
  city_suburb_rush,
  cbd_rush,
  shopping,
  work,
  weekend,
  access_distance,
  egress_distance,
  dest_within_walk,
  age_over_65,
  fare,
  constant,
};

inline constexpr std::size_t kVariableCount = 17;

std::string_view name_of(variable v);
std::optional<variable> parse_variable(std::string_view s);

struct slot {
  mode m{mode::walk};
  variable v{variable::constant};
  friend bool operator==(slot const&, slot const&) = default;
};

struct parameter {
  std::string name;
  double value{0.0};
  std::vector<slot> slots;
  std::optional<double> t_stat;  // metadata only

  friend bool operator==(parameter const&, parameter const&) = default;
};

// Named parameters with explicit tying: one parameter may occupy slots in
// several alternatives. Each (mode, variable) slot belongs to at most one
// parameter.
class coefficient_table {
public:
  std::string units{"hours"};
  std::vector<parameter> parameters;

  // Throws config_error on duplicate names, duplicate slots, empty slot lists
  // or units other than "hours".
  void validate() const;

  std::size_t size() const { return parameters.size(); }
  std::optional<std::size_t> find(std::string_view name) const;
  double value_of(std::string_view name) const;

  std::vector<double> values() const;
  void set_values(std::vector<double> const& v);

  friend bool operator==(coefficient_table const&, coefficient_table const&) =
      default;
};

// {units, parameters: [{name, value, slots: [[mode, variable], ...], t_stat}]}
// A preset without units is refused.
coefficient_table coefficients_from_json(nlohmann::json const& j);
nlohmann::json to_json(coefficient_table const& t);
coefficient_table load_coefficients(std::string const& path);
void save_coefficients(coefficient_table const& t, std::string const& path);

}  // namespace mclab
