#include "mclab/coefficients.hpp"

#include <array>
#include <fstream>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "mclab/error.hpp"

namespace mclab {

namespace {

constexpr std::array<std::string_view, kVariableCount> kVariableNames{
    "TravelTime",     "HouseholdMembers", "HouseholdVehicles", "Female",
    "Transfers",      "Income",           "CitySuburbRush",    "CbdRush",
    "Shopping",       "Work",             "Weekend",           "AccessDistance",
    "EgressDistance", "DestWithinWalk",   "AgeOver65",         "Fare",
    "Constant"};

}  // namespace

std::string_view name_of(variable v) {
  return kVariableNames[static_cast<std::size_t>(v)];
}

std::optional<variable> parse_variable(std::string_view s) {
  for (auto i = std::size_t{0}; i != kVariableCount; ++i) {
    if (kVariableNames[i] == s) {
      return static_cast<variable>(i);
    }
  }
  return std::nullopt;
}

void coefficient_table::validate() const {
  if (units != "hours") {
    throw config_error{"coefficient units must be \"hours\", got \"" + units +
                       "\""};
  }
  std::set<std::string> names;
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (auto const& p : parameters) {
    if (!names.insert(p.name).second) {
      throw config_error{"duplicate parameter " + p.name};
    }
    if (p.slots.empty()) {
      throw config_error{"parameter " + p.name + " occupies no slot"};
    }
    for (auto const& s : p.slots) {
      if (!used.insert({index_of(s.m), static_cast<std::size_t>(s.v)}).second) {
        throw config_error{"slot (" + std::string{name_of(s.m)} + ", " +
                           std::string{name_of(s.v)} +
                           ") is claimed twice, last by " + p.name};
      }
    }
  }
}

std::optional<std::size_t> coefficient_table::find(std::string_view name) const {
  for (auto i = std::size_t{0}; i != parameters.size(); ++i) {
    if (parameters[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

double coefficient_table::value_of(std::string_view name) const {
  auto const i = find(name);
  if (!i) {
    throw key_error{"unknown parameter " + std::string{name}};
  }
  return parameters[*i].value;
}

std::vector<double> coefficient_table::values() const {
  std::vector<double> v;
  v.reserve(parameters.size());
  for (auto const& p : parameters) {
    v.push_back(p.value);
  }
  return v;
}

void coefficient_table::set_values(std::vector<double> const& v) {
  if (v.size() != parameters.size()) {
    throw consistency_error{"expected " + std::to_string(parameters.size()) +
                            " values, got " + std::to_string(v.size())};
  }
  for (auto i = std::size_t{0}; i != v.size(); ++i) {
    parameters[i].value = v[i];
  }
}

coefficient_table coefficients_from_json(nlohmann::json const& j) {
  if (!j.is_object()) {
    throw config_error{"coefficients: expected an object"};
  }
  if (!j.contains("units")) {
    throw config_error{"coefficients: units missing"};
  }
  coefficient_table t;
  try {
    t.units = j.at("units").get<std::string>();
    for (auto const& jp : j.at("parameters")) {
      parameter p;
      p.name = jp.at("name").get<std::string>();
      p.value = jp.at("value").get<double>();
      for (auto const& js : jp.at("slots")) {
        auto const ms = js.at(0).get<std::string>();
        auto const vs = js.at(1).get<std::string>();
        auto const m = parse_mode_name(ms);
        auto const v = parse_variable(vs);
        if (!m) {
          throw config_error{"coefficients." + p.name + ": unknown mode " + ms};
        }
        if (!v) {
          throw config_error{"coefficients." + p.name + ": unknown variable " +
                             vs};
        }
        p.slots.push_back({*m, *v});
      }
      if (jp.contains("t_stat") && !jp.at("t_stat").is_null()) {
        p.t_stat = jp.at("t_stat").get<double>();
      }
      t.parameters.push_back(std::move(p));
    }
  } catch (nlohmann::json::exception const& e) {
    throw config_error{std::string{"coefficients: "} + e.what()};
  }
  t.validate();
  return t;
}

nlohmann::json to_json(coefficient_table const& t) {
  auto params = nlohmann::json::array();
  for (auto const& p : t.parameters) {
    auto slots = nlohmann::json::array();
    for (auto const& s : p.slots) {
      slots.push_back({std::string{name_of(s.m)}, std::string{name_of(s.v)}});
    }
    nlohmann::json jp{{"name", p.name}, {"value", p.value}, {"slots", slots}};
    if (p.t_stat) {
      jp["t_stat"] = *p.t_stat;
    }
    params.push_back(std::move(jp));
  }
  return {{"units", t.units}, {"parameters", params}};
}

coefficient_table load_coefficients(std::string const& path) {
  std::ifstream in{path};
  if (!in) {
    throw io_error{"cannot open " + path};
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (nlohmann::json::exception const& e) {
    throw config_error{path + ": " + e.what()};
  }
  return coefficients_from_json(j);
}

void save_coefficients(coefficient_table const& t, std::string const& path) {
  std::ofstream out{path};
  if (!out) {
    throw io_error{"cannot write " + path};
  }
  out << to_json(t).dump(2) << '\n';
}

}  // namespace mclab
