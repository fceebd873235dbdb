#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mclab {

// The eight alternatives of the mode choice model, in canonical order. The
// numeric value doubles as the alternative index everywhere (masks, arrays).
enum class mode : std::uint8_t {
  walk,
  bike,
  drive,
  passenger,
  cta,
  pace,
  hrail_slow,
  hrail_fast,
};

inline constexpr std::size_t kModeCount = 8;

inline constexpr std::array<mode, kModeCount> kAllModes = {
    mode::walk, mode::bike,       mode::drive,     mode::passenger,
    mode::cta,  mode::pace,       mode::hrail_slow, mode::hrail_fast};

constexpr std::size_t index_of(mode m) { return static_cast<std::size_t>(m); }

constexpr bool is_transit(mode m) {
  return m == mode::cta || m == mode::pace || m == mode::hrail_slow ||
         m == mode::hrail_fast;
}

// Canonical names: Walk, Bike, Drive, Passenger, CTA, Pace, HRailSlowAccess,
// HRailFastAccess.
std::string_view name_of(mode m);

// Inverse of name_of; nullopt for anything else.
std::optional<mode> parse_mode_name(std::string_view name);

// Availability mask, bit i is kAllModes[i].
using mode_set = std::bitset<kModeCount>;

inline std::uint8_t to_mask(mode_set s) {
  return static_cast<std::uint8_t>(s.to_ulong());
}

// Observed mode labels as they appear in the travel survey.
enum class raw_mode : std::uint8_t {
  auto_driver,
  auto_passenger,
  walk,
  bike,
  metra_train,
  metra_train_drive_access,
  cta_train,
  cta_bus,
  pace_bus,
  school_bus,
  taxi,
  other,
  multiple_transit,
  private_shuttle,
  dial_a_ride,
  local_transit_nirpc,
};

inline constexpr std::size_t kRawModeCount = 16;

// Canonical survey label, e.g. "Auto / Van / Truck Driver".
std::string_view label_of(raw_mode r);

// Parses a survey label. Accepts the canonical labels plus the "OTHER
// (SPECIFY)" spelling. Throws unrecognized_mode naming the label otherwise.
raw_mode parse_raw_mode(std::string_view label);

// Total mapping from survey labels to model alternatives; nullopt means the
// label is excluded from the model.
std::optional<mode> map_survey_mode(raw_mode r);
std::optional<mode> map_survey_mode(std::string_view label);

// Public transit of any kind, including labels excluded from the model.
bool is_transit_label(raw_mode r);

// Label the synthetic generator writes for an alternative.
raw_mode survey_label_for(mode m);

}  // namespace mclab
