#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mclab/altgen.hpp"
#include "mclab/analytics.hpp"
#include "mclab/choiceset.hpp"
#include "mclab/coefficients.hpp"
#include "mclab/error.hpp"
#include "mclab/mnl.hpp"
#include "mclab/survey.hpp"

namespace mclab::test {

namespace fs = std::filesystem;

fs::path fixture_path(std::string_view rel);

// The shipped coefficient preset.
fs::path preset_path();

// Fresh empty directory under the build tree's scratch area.
fs::path scratch_dir(std::string_view name);

std::string read_file(fs::path const& p);

// Authored survey fixture, parsed and chained.
population load_fixture_survey();

// Authored feed registered as agency "CTA".
gtfs::feed load_fixture_feed();

struct world {
  fs::path dir;
  population pop;
  feed_set feeds;
  region_config region;
  altgen_config altgen;
};

// generate_synthetic into `dir`, then everything up to choice formation.
world make_synthetic_world(fs::path const& dir, std::size_t households,
                           std::uint64_t seed);

struct formed_trip {
  trip t;
  alternative_set alternatives{};
  choice_set cs;
};

// Forms every trip's choice set the way the choicesets stage does.
// Degenerate sets are skipped.
std::vector<formed_trip> form_all(world const& w);

// ---- independent oracles ----------------------------------------------------

// Vehicles away with members other than `who` at absolute second t, from a
// direct scan of the other members' tours.
std::uint32_t oracle_vehicles_away(population const& pop, person_id who,
                                   std::int64_t t);

struct oracle_choice {
  mode_set available;
  std::vector<constraint_entry> log;  // ordered by (rule, mode)
  std::vector<constraint_entry> repairs;
  bool degenerate{false};
};

// Re-evaluates every rule for every alternative on its own.
oracle_choice oracle_choice_set(population const& pop, trip const& t,
                                alternative_set const& alternatives);

// Brute-force tallies of every analytics report, compared against the
// library's output. Returns one message per disagreement.
std::vector<std::string> check_reports(population const& pop,
                                       std::span<choice_set const> sets);

// ---- random data ------------------------------------------------------------

// Every variable of every mode filled, at least one alternative available.
observation random_observation(std::mt19937_64& gen, std::uint64_t id);

// Per-mode travel time plus a handful of tied and alternative-specific terms.
coefficient_table small_table();

}  // namespace mclab::test
