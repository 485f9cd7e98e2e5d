// Copyright 2026 The Nester Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "nester/error.hpp"

namespace nester::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nester_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Small problem so each run takes well under a second.
  RunConfig small(const std::string& command, const std::string& out) {
    RunConfig cfg = RunConfig::from_text(
        "command=" + command +
        "\n"
        "gen.n=200\n"
        "gen.d=3\n"
        "synth.max_depth=2\n"
        "synth.max_expansions=50\n"
        "heuristic.epochs=3\n"
        "final.epochs=5\n");
    cfg.set("out", (dir_ / out).string());
    return cfg;
  }

  fs::path dir_;
};

TEST(RunConfigText, ParsesCommentsAndDefaults) {
  const RunConfig cfg = RunConfig::from_text("# a comment\n  seed = 7  \ngen.n=300 # trailing\n\n");
  EXPECT_EQ(cfg.seed(), 7u);
  EXPECT_EQ(cfg.get_int("gen.n"), 300);
  EXPECT_EQ(cfg.get("gen.kind"), "twins");
  EXPECT_TRUE(cfg.explicitly_set("gen.n"));
  EXPECT_FALSE(cfg.explicitly_set("gen.d"));
  EXPECT_EQ(cfg.command(), Command::kSynthesize);
}

TEST(RunConfigText, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(RunConfig::from_text("gen.nn=3"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("just words"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("gen.n=many").get_int("gen.n"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("seed=-1").seed(), ConfigError);
  EXPECT_THROW(RunConfig::from_text("command=dance").command(), ConfigError);
  EXPECT_THROW(RunConfig::from_text("gen.heterogeneous=maybe").get_bool("gen.heterogeneous"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("final.optimizer=rmsprop").train_config("final"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("final.epochs=0").train_config("final"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("train.preset=mnist"), ConfigError);
}

TEST(RunConfigText, PresetsFillUnsetTrainingKnobs) {
  const RunConfig twins = RunConfig::from_text("train.preset=twins");
  EXPECT_EQ(twins.get_int("final.batch_size"), 128);
  EXPECT_EQ(twins.get_int("final.epochs"), 7);
  const RunConfig ihdp = RunConfig::from_text("final.epochs=3\ntrain.preset=ihdp");
  EXPECT_EQ(ihdp.get_int("final.batch_size"), 16);
  EXPECT_EQ(ihdp.get_int("final.epochs"), 3);
  const RunConfig jobs = RunConfig::from_text("train.preset=jobs");
  EXPECT_EQ(jobs.train_config("final").batch_size, 64);
  EXPECT_EQ(jobs.train_config("final").epochs, 10);
}

TEST(RunConfigText, GrammarFollowsRangesAndTags) {
  const RunConfig cfg = RunConfig::from_text("synth.ranges=0:2, 1:3\nsynth.algebraic=add");
  const Grammar g = grammar_for(cfg, 3);
  // if, transform, subset (0,1) (0,3) (0,2) (1,3), const, add, v.
  EXPECT_EQ(g.rules().size(), 9u);
  EXPECT_THROW(grammar_for(RunConfig::from_text("synth.ranges=0-2"), 3), ConfigError);
  EXPECT_THROW(grammar_for(RunConfig::from_text("synth.ranges=0:9"), 3), BoundsError);
  EXPECT_THROW(grammar_for(RunConfig::from_text("synth.algebraic=pow"), 3), ConfigError);
}

TEST_F(CliTest, SynthesizeWritesReports) {
  const RunConfig cfg = small("synthesize", "run");
  ASSERT_EQ(run(cfg), kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir_ / "run" / "report.json"));
  for (const char* key : {"program", "path_cost", "eps_ate_in", "eps_ate_out", "sqrt_pehe_in",
                          "sqrt_pehe_out", "eps_att_in", "eps_att_out", "expansions", "seed", "config"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_GE(doc["eps_ate_out"].get<double>(), 0.0);
  EXPECT_TRUE(doc["eps_att_out"].is_null());
  EXPECT_EQ(doc["baselines"].size(), 3u);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "report.txt"));
  EXPECT_FALSE(slurp(dir_ / "run" / "frontier.tsv").empty());
}

TEST_F(CliTest, SameSeedGivesByteIdenticalReports) {
  ASSERT_EQ(run(small("synthesize", "a")), kExitOk);
  ASSERT_EQ(run(small("synthesize", "b")), kExitOk);
  EXPECT_EQ(slurp(dir_ / "a" / "report.json"), slurp(dir_ / "b" / "report.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "frontier.tsv"), slurp(dir_ / "b" / "frontier.tsv"));
  RunConfig other = small("synthesize", "c");
  other.set("seed", "1");
  ASSERT_EQ(run(other), kExitOk);
  EXPECT_NE(slurp(dir_ / "a" / "report.json"), slurp(dir_ / "c" / "report.json"));
}

TEST_F(CliTest, BaselineRowsShareTheMetricKeys) {
  ASSERT_EQ(run(small("baseline", "base")), kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir_ / "base" / "report.json"));
  ASSERT_EQ(doc["baselines"].size(), 3u);
  for (const auto& row : doc["baselines"]) {
    for (const char* key : {"program", "eps_ate_in", "eps_ate_out", "sqrt_pehe_out", "eps_att_out", "seed"}) {
      EXPECT_TRUE(row.contains(key)) << key;
    }
  }
  EXPECT_EQ(doc["baselines"][2]["biased_in_sample"], true);
}

TEST_F(CliTest, JobsDataReportsAtt) {
  RunConfig cfg = small("baseline", "jobs");
  cfg.set("gen.kind", "jobs");
  cfg.set("gen.n_rand", "100");
  cfg.set("gen.n_obs", "200");
  ASSERT_EQ(run(cfg), kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir_ / "jobs" / "report.json"));
  EXPECT_TRUE(doc["baselines"][0]["eps_att_out"].is_number());
  EXPECT_TRUE(doc["baselines"][0]["eps_ate_out"].is_null());
}

TEST_F(CliTest, GeneratedCsvFeedsBackIn) {
  ASSERT_EQ(run(small("gen_data", "gen")), kExitOk);
  RunConfig cfg = small("baseline", "from_csv");
  cfg.set("data.source", "csv");
  cfg.set("data.csv", (dir_ / "gen" / "data.csv").string());
  ASSERT_EQ(run(cfg), kExitOk);
  RunConfig direct = small("baseline", "direct");
  ASSERT_EQ(run(direct), kExitOk);
  const auto a = nlohmann::json::parse(slurp(dir_ / "from_csv" / "report.json"));
  const auto b = nlohmann::json::parse(slurp(dir_ / "direct" / "report.json"));
  EXPECT_EQ(a["baselines"], b["baselines"]);
}

TEST_F(CliTest, InvalidCsvSchemaExitsWithValidationCode) {
  std::ofstream(dir_ / "bad.csv") << "treatment,y,x\n1,2,3\n0,1,2\n";
  RunConfig cfg = small("baseline", "bad");
  cfg.set("data.source", "csv");
  cfg.set("data.csv", (dir_ / "bad.csv").string());
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run(cfg), kExitValidation);
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("'t'"), std::string::npos) << err;
}

TEST_F(CliTest, ExhaustedBudgetExitsWithSearchCode) {
  RunConfig cfg = small("synthesize", "budget");
  cfg.set("synth.max_expansions", "1");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run(cfg), kExitSearch);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("budget"), std::string::npos);
}

TEST_F(CliTest, DepthSweepWritesOneRowPerDepth) {
  RunConfig cfg = small("depth_sweep", "sweep");
  cfg.set("sweep.depths", "1,2");
  ASSERT_EQ(run(cfg), kExitOk);
  std::istringstream tsv(slurp(dir_ / "sweep" / "sweep.tsv"));
  std::string line;
  int rows = -1;
  while (std::getline(tsv, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST_F(CliTest, DiagnoseReportsFraction) {
  RunConfig cfg = small("diagnose", "diag");
  cfg.set("diagnose.samples", "3");
  cfg.set("diagnose.max_depth", "1");
  ASSERT_EQ(run(cfg), kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir_ / "diag" / "report.json"));
  EXPECT_GE(doc["fraction_admissible"].get<double>(), 0.0);
  EXPECT_EQ(doc["samples"].size(), 3u);
}

TEST_F(CliTest, MainParsesFlags) {
  std::ofstream(dir_ / "run.cfg") << "command=gen_data\ngen.n=20\ngen.d=2\n";
  const std::string config = (dir_ / "run.cfg").string();
  const std::string out = (dir_ / "main").string();
  std::vector<std::string> args = {"nester", "--config", config, "--seed", "5", "--out", out,
                                   "--set", "gen.d=3"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(main(static_cast<int>(argv.size()), argv.data()), kExitOk);
  const std::string csv = slurp(dir_ / "main" / "data.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,y,y0,y1,x1,x2,x3");

  std::vector<std::string> bad = {"nester", "--config", (dir_ / "absent.cfg").string()};
  std::vector<char*> bad_argv;
  for (auto& a : bad) bad_argv.push_back(a.data());
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(main(static_cast<int>(bad_argv.size()), bad_argv.data()), kExitValidation);
  ::testing::internal::GetCapturedStderr();
}

}  // namespace
}  // namespace nester::cli
