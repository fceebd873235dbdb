#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mclab/csv.hpp"
#include "mclab/error.hpp"
#include "mclab/pipeline.hpp"
#include "support.hpp"

namespace mclab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write(fs::path const& p, std::string const& s) {
  std::ofstream out{p, std::ios::binary};
  out << s;
}

fs::path synth_dir(std::string_view name, std::size_t households, std::uint64_t seed) {
  auto const dir = test::scratch_dir(name);
  synth_settings s;
  s.households = households;
  std::ostringstream sink;
  generate_synthetic(dir, s, seed, sink);
  return dir;
}

TEST(Config, TrainFractionNamesKey) {
  auto const j = json::parse(R"({"split": {"train_fraction": 1.5}})");
  try {
    (void)pipeline_config_from_json(j, ".");
    FAIL();
  } catch (config_error const& e) {
    EXPECT_NE(std::string{e.what()}.find("split.train_fraction"), std::string::npos);
  }
}

TEST(Config, WrongTypeNamesKey) {
  auto const j = json::parse(R"({"estimation": {"max_iterations": "many"}})");
  try {
    (void)pipeline_config_from_json(j, ".");
    FAIL();
  } catch (config_error const& e) {
    EXPECT_NE(std::string{e.what()}.find("estimation.max_iterations"), std::string::npos);
  }
}

TEST(Config, OverridesApply) {
  auto const dir = test::scratch_dir("cli_overrides");
  write(dir / "c.json", R"({"seed": 3, "out": "o"})");
  auto const plain = load_pipeline_config(dir / "c.json");
  EXPECT_EQ(plain.seed, 3U);
  EXPECT_EQ(plain.out, dir / "o");
  config_overrides ov;
  ov.seed = 9;
  ov.out = dir / "elsewhere";
  auto const cfg = load_pipeline_config(dir / "c.json", ov);
  EXPECT_EQ(cfg.seed, 9U);
  EXPECT_EQ(cfg.out, dir / "elsewhere");
}

TEST(Stages, EstimateBeforeChoicesets) {
  auto const dir = synth_dir("cli_order", 40, 5);
  auto const cfg = load_pipeline_config(dir / "config.json");
  std::ostringstream log;
  EXPECT_THROW(run_command("estimate", cfg, log), stage_error);
  EXPECT_THROW(run_command("nonsense", cfg, log), config_error);
}

TEST(Stages, SimulateNeedsSeed) {
  auto const dir = test::scratch_dir("cli_noseed");
  write(dir / "c.json", R"({"apply": {"preset": ")" + test::preset_path().string() + R"("}})");
  auto const cfg = load_pipeline_config(dir / "c.json");
  std::ostringstream log;
  EXPECT_THROW(run_command("simulate", cfg, log), config_error);
}

TEST(Stages, ApplyWalkOnlyIsCertain) {
  auto const dir = test::scratch_dir("cli_apply");
  json rec{{"trip", 1},
           {"available_mask", 1},
           {"alternatives",
            json::array({{{"mode", "Walk"}, {"time_h", 0.2}, {"access_mi", 0.0},
                          {"egress_mi", 0.0}, {"transfers", 0}, {"fare", 0.0}}})},
           {"flags", {{"dest_within_walk", true}}},
           {"age", 40},
           {"purpose", "Other"}};
  write(dir / "one.jsonl", rec.dump() + "\n");
  write(dir / "c.json", json{{"apply", {{"preset", test::preset_path().string()}}},
                             {"out", "out"}}
                            .dump());
  config_overrides ov;
  ov.input = dir / "one.jsonl";
  auto const cfg = load_pipeline_config(dir / "c.json", ov);
  std::ostringstream log;
  run_command("apply", cfg, log);
  auto const t = csv::parse(test::read_file(dir / "out" / "apply" / "probabilities.csv"));
  ASSERT_EQ(t.rows.size(), 1U);
  ASSERT_EQ(t.header.size(), 9U);
  EXPECT_EQ(t.header[1], "Walk");
  EXPECT_EQ(std::stod(t.rows[0][1]), 1.0);
  for (auto i = 2U; i != 9; ++i) {
    EXPECT_EQ(std::stod(t.rows[0][i]), 0.0);
  }
}

class SmallRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path{synth_dir("cli_run", 400, 77)};
    auto const cfg = load_pipeline_config(*dir_ / "config.json");
    std::ostringstream log;
    run_command("run", cfg, log);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path out() { return *dir_ / "pipeline"; }
  static fs::path* dir_;
};

fs::path* SmallRun::dir_ = nullptr;

TEST_F(SmallRun, ConvergesWithIndexInRange) {
  auto const r = json::parse(test::read_file(out() / "estimate" / "result.json"));
  EXPECT_TRUE(r.at("converged").get<bool>());
  auto const idx = r.at("mcfadden_index").get<double>();
  EXPECT_GE(idx, 0.0);
  EXPECT_LE(idx, 1.0);
  EXPECT_GT(r.at("n_observations").get<std::size_t>(), 0U);
}

TEST_F(SmallRun, EveryStageHasManifest) {
  for (auto const* s : {"ingest", "altgen", "choicesets", "split", "analyze", "estimate"}) {
    auto const d = out() / s;
    ASSERT_TRUE(fs::exists(d / "manifest.json")) << s;
    ASSERT_TRUE(fs::exists(d / "run_metadata.json")) << s;
    auto const m = json::parse(test::read_file(d / "manifest.json"));
    ASSERT_TRUE(m.contains("outputs")) << s;
  }
}

TEST_F(SmallRun, ManifestHashesMatchFiles) {
  auto const d = out() / "choicesets";
  auto const m = json::parse(test::read_file(d / "manifest.json"));
  auto const outs = m.at("outputs");
  ASSERT_FALSE(outs.empty());
  for (auto const& o : outs) {
    auto const p = d / fs::path{o.at("path").get<std::string>()}.filename();
    EXPECT_EQ(o.at("sha256").get<std::string>(), file_sha256(p));
  }
}

TEST_F(SmallRun, RerunIsIdempotent) {
  auto const before = test::read_file(out() / "estimate" / "result.json");
  auto const man = test::read_file(out() / "choicesets" / "choicesets.jsonl");
  auto const cfg = load_pipeline_config(*dir_ / "config.json");
  std::ostringstream log;
  run_command("choicesets", cfg, log);
  run_command("estimate", cfg, log);
  EXPECT_EQ(test::read_file(out() / "estimate" / "result.json"), before);
  EXPECT_EQ(test::read_file(out() / "choicesets" / "choicesets.jsonl"), man);
}

TEST_F(SmallRun, ApplyAndSimulateOnChoicesets) {
  config_overrides ov;
  ov.input = out() / "choicesets" / "choicesets.jsonl";
  ov.seed = 5;
  auto const cfg = load_pipeline_config(*dir_ / "config.json", ov);
  std::ostringstream log;
  run_command("apply", cfg, log);
  run_command("simulate", cfg, log);
  auto const p = csv::parse(test::read_file(out() / "apply" / "probabilities.csv"));
  ASSERT_FALSE(p.rows.empty());
  for (auto const& row : p.rows) {
    double s = 0.0;
    for (auto i = 1U; i != row.size(); ++i) {
      s += std::stod(row[i]);
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  auto const c = csv::parse(test::read_file(out() / "simulate" / "choices.csv"));
  EXPECT_EQ(c.rows.size(), p.rows.size());
}

TEST(Sha256, KnownVector) {
  auto const dir = test::scratch_dir("cli_sha");
  write(dir / "abc", "abc");
  EXPECT_EQ(file_sha256(dir / "abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#ifdef MCLAB_CLI_PATH
int run_cli(std::string const& args) {
  auto const cmd = std::string{MCLAB_CLI_PATH} + " " + args + " >/dev/null 2>&1";
  auto const rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Binary, ExitCodes) {
  auto const dir = synth_dir("cli_binary", 30, 6);
  auto const cfg = (dir / "config.json").string();
  EXPECT_NE(run_cli("estimate --config " + cfg), 0);
  EXPECT_EQ(run_cli("ingest --config " + cfg), 0);
  EXPECT_TRUE(fs::exists(dir / "pipeline" / "ingest" / "population.json"));
  EXPECT_NE(run_cli("ingest --config " + (dir / "missing.json").string()), 0);
  EXPECT_NE(run_cli("frobnicate"), 0);
}
#endif

}  // namespace
}  // namespace mclab
