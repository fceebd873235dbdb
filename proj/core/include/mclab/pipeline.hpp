#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mclab/altgen.hpp"
#include "mclab/mnl.hpp"
#include "mclab/region.hpp"

namespace mclab {

struct synth_settings {
  std::size_t households{2000};
  std::optional<std::filesystem::path> truth;  // coefficient file; built-in if unset
  std::string start_date{"2008-03-03"};
  std::uint32_t days{14};
};

struct pipeline_config {
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::filesystem::path households;
  std::filesystem::path persons;
  std::filesystem::path trips;
  std::map<std::string, std::filesystem::path> gtfs;  // agency -> directory
  std::optional<std::filesystem::path> routing_cache;
  std::filesystem::path out;

  region_config region;
  altgen_config altgen;
  double chain_tolerance_m{300.0};

  double train_fraction{0.8};
  std::optional<std::uint64_t> seed;

  estimate_options estimation;
  std::optional<std::filesystem::path> estimation_spec;  // init values + tying
  std::optional<std::filesystem::path> preset;           // apply / simulate
  std::optional<std::filesystem::path> apply_input;      // choice set file

  synth_settings synth;

  nlohmann::json raw;  // as loaded, for manifests
};

struct config_overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> input;
};

// Parses the JSON configuration. Throws config_error with the key path on a
// bad value.
pipeline_config pipeline_config_from_json(nlohmann::json const& j,
                                          std::filesystem::path const& base);
pipeline_config load_pipeline_config(std::filesystem::path const& path,
                                     config_overrides const& overrides = {});

inline constexpr std::string_view kCommands[] = {
    "ingest", "altgen", "choicesets", "split", "analyze",
    "estimate", "apply", "simulate", "synth", "run"};

// Runs one stage, writing its artifacts under cfg.out/<stage>/ together with
// manifest.json (inputs, parameters, content hashes) and run_metadata.json
// (wall clock). "run" chains ingest, altgen, choicesets, split, analyze and
// estimate. Throws stage_error for a missing prerequisite artifact and
// config_error for bad settings.
void run_command(std::string_view name, pipeline_config const& cfg,
                 std::ostream& log);

// One line of choicesets.jsonl: masks in canonical mode order, the chosen
// index, attributes of every alternative with service, the constraint log
// and the household/person/trip context needed to rebuild the observation.
nlohmann::json choice_set_record(choice_set const& cs, household const& h,
                                 person const& p, trip const& t,
                                 std::uint32_t leg, bool eligible);

// Inverse of choice_set_record as far as the model needs it. Without
// require_chosen a record lacking a chosen mode scores with the first
// available alternative marked. Throws data_error on malformed records.
observation observation_from_record(nlohmann::json const& rec,
                                    bool require_chosen = true);

// SHA-256 of a file's bytes, lowercase hex.
std::string file_sha256(std::filesystem::path const& p);

// The eight-parameter table the synthetic generator uses by default.
coefficient_table default_synthetic_truth();

// Writes a synthetic survey, three agency feeds, a region config, the truth
// coefficients and a pipeline config (config.json) into `dir`. Observed modes
// of first legs are drawn from the truth model under the same availability
// rules the pipeline applies.
void generate_synthetic(std::filesystem::path const& dir,
                        synth_settings const& settings, std::uint64_t seed,
                        std::ostream& log);

}  // namespace mclab
