#include <gtest/gtest.h>

#include <json.hpp>

#include "adspeech/io.h"
#include "cli.h"
#include "cli_pipeline.h"
#include "test_util.h"

namespace adspeech {
namespace {

using cli::parse_dataset_expr;

TEST(DatasetExpr, Grammar) {
  auto e = parse_dataset_expr("DB");
  EXPECT_EQ(e.base, "DB");
  EXPECT_TRUE(e.parts.empty());
  e = parse_dataset_expr("DB' + 0.29*H' + CCC");
  EXPECT_EQ(e.base, "DB'");
  ASSERT_EQ(e.parts.size(), 2u);
  EXPECT_EQ(e.parts[0].name, "H'");
  EXPECT_EQ(e.parts[0].fraction, 0.29);
  EXPECT_EQ(e.parts[1].name, "CCC");
  EXPECT_EQ(e.parts[1].fraction, 1.0);
  EXPECT_EQ(parse_dataset_expr("a+b").parts[0].name, "b");
}

TEST(DatasetExpr, Rejections) {
  for (const char* bad : {"", "DB +", "DB + 2*HX", "DB + -0.1*HX", "DB + 0.5 HX", "DB HX",
                          "1DB", "DB + 0.5*", "DB + x*HX"}) {
    EXPECT_THROW(parse_dataset_expr(bad), InputError) << bad;
  }
}

TEST(Config, UnknownKeysAndMissingFiles) {
  testing::TempDir dir("cfg");
  write_file(dir.path() / "a.json", R"({"seed": 1, "bogus": 2})");
  EXPECT_THROW(cli::load_config(dir.path() / "a.json"), InputError);
  write_file(dir.path() / "b.json", R"({"datasets": {"X": "missing/manifest.csv"}})");
  EXPECT_THROW(cli::load_config(dir.path() / "b.json"), InputError);
  write_file(dir.path() / "c.json", R"({"model": {"rf_trees": "many"}})");
  EXPECT_THROW(cli::load_config(dir.path() / "c.json"), InputError);
  write_file(dir.path() / "d.json", "{ not json");
  EXPECT_THROW(cli::load_config(dir.path() / "d.json"), InputError);
  write_file(dir.path() / "e.json", R"({"seed": 9, "out": "res", "model": {"cv_k": 4}})");
  const cli::RunConfig cfg = cli::load_config(dir.path() / "e.json");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.cv_k, 4);
  EXPECT_EQ(cfg.out, (dir.path() / "res").lexically_normal());
  EXPECT_EQ(cfg.features_path(), cfg.out / "features.csv");
}

TEST(Cli, ExitCodes) {
  testing::TempDir dir("exit");
  EXPECT_EQ(cli::run({"adspeech", "--bogus"}), 1);
  EXPECT_EQ(cli::run({"adspeech", "--out", dir.path().string(), "evaluate", "NOPE"}), 1);
  write_file(dir.path() / "x.json", R"({"seed": "abc"})");
  EXPECT_EQ(cli::run({"adspeech", "--config", (dir.path() / "x.json").string(), "synth"}), 1);
}

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_a = new testing::TempDir("pipeA");
    dir_b = new testing::TempDir("pipeB");
    run_a = new testing::PipelineRun(testing::run_pipeline(dir_a->path()));
    run_b = new testing::PipelineRun(testing::run_pipeline(dir_b->path()));
  }
  static void TearDownTestSuite() {
    delete run_a;
    delete run_b;
    delete dir_a;
    delete dir_b;
  }
  static testing::TempDir* dir_a;
  static testing::TempDir* dir_b;
  static testing::PipelineRun* run_a;
  static testing::PipelineRun* run_b;
};

testing::TempDir* CliPipeline::dir_a = nullptr;
testing::TempDir* CliPipeline::dir_b = nullptr;
testing::PipelineRun* CliPipeline::run_a = nullptr;
testing::PipelineRun* CliPipeline::run_b = nullptr;

TEST_F(CliPipeline, EveryCommandSucceeds) {
  for (const auto& [cmd, code] : run_a->exit_codes) EXPECT_EQ(code, 0) << cmd;
}

TEST_F(CliPipeline, ArtifactsAreByteIdentical) {
  ASSERT_EQ(run_a->artifacts.size(), run_b->artifacts.size());
  for (const auto& [path, bytes] : run_a->artifacts) {
    const auto it = run_b->artifacts.find(path);
    ASSERT_NE(it, run_b->artifacts.end()) << path;
    EXPECT_TRUE(it->second == bytes) << path;
  }
}

TEST_F(CliPipeline, ExpectedOutputs) {
  const auto& art = run_a->artifacts;
  for (const char* p : {"corpus/config.json", "corpus/run.json", "corpus/synth.run.json", "corpus/DB/manifest.csv",
                        "corpus/features.csv", "corpus/results/results.csv",
                        "corpus/results/results.txt", "corpus/results/reports.jsonl",
                        "corpus/results/fairness.json", "corpus/results/anchors.jsonl",
                        "corpus/results/model.json", "corpus/results/boundary.pgm",
                        "corpus/results/boundary.svg", "corpus/results/embedding.csv",
                        "corpus/results/sweep.csv", "corpus/results/sweep.svg"}) {
    EXPECT_TRUE(art.count(p)) << p;
  }
  const std::string& table = art.at("corpus/features.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1 + 24 + 12);

  const auto run = nlohmann::json::parse(art.at("corpus/results/evaluate.run.json"));
  EXPECT_EQ(run["command"], "evaluate");
  EXPECT_EQ(run["config"]["path"], "run.json");
  for (const auto& a : run["artifacts"]) {
    const std::string p = "corpus/results/" + a["path"].get<std::string>();
    ASSERT_TRUE(art.count(p)) << p;
    EXPECT_EQ(a["sha256"], sha256_hex(art.at(p)));
  }
  const std::string& results = art.at("corpus/results/results.csv");
  EXPECT_NE(results.find("DB + 0.5*HX"), std::string::npos);
  const std::string& anchors = art.at("corpus/results/anchors.jsonl");
  EXPECT_EQ(std::count(anchors.begin(), anchors.end(), '\n'), 3);
}

TEST_F(CliPipeline, ExtractResumesWithoutChanges) {
  const auto config = (dir_a->path() / "corpus" / "run.json").string();
  const auto before = read_file(dir_a->path() / "corpus" / "features.csv");
  EXPECT_EQ(cli::run({"adspeech", "--config", config, "extract"}), 0);
  EXPECT_EQ(read_file(dir_a->path() / "corpus" / "features.csv"), before);
}

TEST_F(CliPipeline, RejectsOutOfRangeFraction) {
  const auto config = (dir_a->path() / "corpus" / "run.json").string();
  EXPECT_EQ(cli::run({"adspeech", "--config", config, "evaluate", "DB + 2*HX"}), 1);
}

}  // namespace
}  // namespace adspeech
