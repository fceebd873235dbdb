#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mclab/error.hpp"
#include "mclab/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mode choice toolkit: survey ingest, choice sets, MNL"};
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> input;

  for (auto const name : mclab::kCommands) {
    auto* sub = app.add_subcommand(std::string{name});
    sub->add_option("--config", config, "pipeline configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out, "override the output directory");
    if (name == "apply" || name == "simulate") {
      sub->add_option("--input", input, "choice set file to score");
    }
  }

  CLI11_PARSE(app, argc, argv);
  auto const command = app.get_subcommands().front()->get_name();

  try {
    mclab::config_overrides ov;
    ov.seed = seed;
    if (out) {
      ov.out = *out;
    }
    if (input) {
      ov.input = *input;
    }
    auto const cfg = mclab::load_pipeline_config(config, ov);
    mclab::run_command(command, cfg, std::cout);
  } catch (mclab::error const& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (std::exception const& e) {
    std::cerr << "Error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
