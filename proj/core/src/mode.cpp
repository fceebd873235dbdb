#include "mclab/mode.hpp"

#include <string>

#include "mclab/error.hpp"

namespace mclab {

namespace {

constexpr std::array<std::string_view, kModeCount> kModeNames = {
    "Walk", "Bike", "Drive", "Passenger",
    "CTA",  "Pace", "HRailSlowAccess", "HRailFastAccess"};

constexpr std::array<std::string_view, kRawModeCount> kRawLabels = {
    "Auto / Van / Truck Driver",
    "Auto / Van / Truck Passenger",
    "Walk",
    "Bike",
    "Metra Train",
    "Metra Train (drive access)",
    "CTA Train",
    "CTA Bus",
    "Pace Bus",
    "School Bus",
    "Taxi",
    "OTHER",
    "More than one transit provider",
    "Private shuttle bus",
    "Dial a ride/Paratransit",
    "Local Transit (NIRPC region)",
};

}  // namespace

std::string_view name_of(mode m) { return kModeNames[index_of(m)]; }

std::optional<mode> parse_mode_name(std::string_view name) {
  for (auto const m : kAllModes) {
    if (kModeNames[index_of(m)] == name) {
      return m;
    }
  }
  return std::nullopt;
}

std::string_view label_of(raw_mode r) {
  return kRawLabels[static_cast<std::size_t>(r)];
}

raw_mode parse_raw_mode(std::string_view label) {
  for (auto i = 0U; i != kRawModeCount; ++i) {
    if (kRawLabels[i] == label) {
      return static_cast<raw_mode>(i);
    }
  }
  if (label == "OTHER (SPECIFY)") {
    return raw_mode::other;
  }
  throw unrecognized_mode{"unrecognized survey mode \"" + std::string{label} +
                          "\""};
}

std::optional<mode> map_survey_mode(raw_mode r) {
  switch (r) {
    case raw_mode::auto_driver: return mode::drive;
    case raw_mode::auto_passenger: return mode::passenger;
    case raw_mode::walk: return mode::walk;
    case raw_mode::bike: return mode::bike;
    case raw_mode::metra_train: return mode::hrail_slow;
    case raw_mode::metra_train_drive_access: return mode::hrail_fast;
    case raw_mode::cta_train:
    case raw_mode::cta_bus: return mode::cta;
    case raw_mode::pace_bus: return mode::pace;
    case raw_mode::school_bus:
    case raw_mode::taxi:
    case raw_mode::other:
    case raw_mode::multiple_transit:
    case raw_mode::private_shuttle:
    case raw_mode::dial_a_ride:
    case raw_mode::local_transit_nirpc: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<mode> map_survey_mode(std::string_view label) {
  return map_survey_mode(parse_raw_mode(label));
}

bool is_transit_label(raw_mode r) {
  switch (r) {
    case raw_mode::metra_train:
    case raw_mode::metra_train_drive_access:
    case raw_mode::cta_train:
    case raw_mode::cta_bus:
    case raw_mode::pace_bus:
    case raw_mode::multiple_transit:
    case raw_mode::local_transit_nirpc: return true;
    default: return false;
  }
}

raw_mode survey_label_for(mode m) {
  switch (m) {
    case mode::walk: return raw_mode::walk;
    case mode::bike: return raw_mode::bike;
    case mode::drive: return raw_mode::auto_driver;
    case mode::passenger: return raw_mode::auto_passenger;
    case mode::cta: return raw_mode::cta_bus;
    case mode::pace: return raw_mode::pace_bus;
    case mode::hrail_slow: return raw_mode::metra_train;
    case mode::hrail_fast: return raw_mode::metra_train_drive_access;
  }
  return raw_mode::other;
}

}  // namespace mclab
