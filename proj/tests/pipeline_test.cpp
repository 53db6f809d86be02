// Copyright 2026 The TRIQA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "triqa/pipeline.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "triqa/errors.hpp"
#include "triqa/synthetic.hpp"

namespace triqa {
namespace {

TEST(Config, DefaultsAndSet) {
  PipelineConfig c;
  EXPECT_EQ(c.encoder.batch_size, 64);
  c.set("train.batch_size", "8");
  c.set("run.seed", "42");
  c.set("eval.formats", "json,csv,plots");
  c.set("forge.include_combined", "false");
  c.finalize();
  EXPECT_EQ(c.encoder.batch_size, 8);
  EXPECT_EQ(c.encoder.seed, 42u);
  EXPECT_EQ(c.protocol.seed, 42u);
  EXPECT_FALSE(c.manifest.include_combined);
  EXPECT_EQ(c.formats.size(), 3u);
}

TEST(Config, BadSettingsRejected) {
  PipelineConfig c;
  EXPECT_THROW(c.set("train.nonexistent", "1"), ConfigError);
  EXPECT_THROW(c.set("train.batch_size", "eight"), ConfigError);
  EXPECT_THROW(c.set("forge.include_combined", "perhaps"), ConfigError);
  EXPECT_THROW(c.set("train.preset", "huge"), ConfigError);
  EXPECT_THROW(c.set("eval.formats", "yaml"), ConfigError);
  PipelineConfig d;
  d.set("train.margin", "-1");
  EXPECT_THROW(d.finalize(), ConfigError);
}

TEST(Config, FileThenOverrides) {
  testing::TempDir dir("config");
  std::ofstream(dir / "p.ini") << "# comment\n[run]\nseed = 5\n[train]\nbatch_size = 16\n"
                                  "[eval]\niterations = 3\n";
  PipelineConfig c = load_config(dir / "p.ini");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.encoder.batch_size, 16);
  EXPECT_EQ(c.protocol.iterations, 3);
  c.set("train.batch_size", "4");  // a flag wins over the file
  c.finalize();
  EXPECT_EQ(c.encoder.batch_size, 4);
  EXPECT_EQ(c.encoder.seed, 5u);

  std::ofstream(dir / "bad.ini") << "[train]\nwhat = 1\n";
  EXPECT_THROW(load_config(dir / "bad.ini"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.ini"), ConfigError);
}

TEST(Config, ShippedExampleParses) {
  PipelineConfig c = load_config(TRIQA_SOURCE_DIR "/config/pipeline.ini");
  c.finalize();
  const std::string text = c.to_text();
  EXPECT_NE(text.find("seed = 0"), std::string::npos);
  // to_text is itself a loadable config.
  testing::TempDir dir("config_dump");
  std::ofstream(dir / "dump.ini") << text;
  PipelineConfig back = load_config(dir / "dump.ini");
  back.finalize();
  EXPECT_EQ(back.to_text(), text);
}

TEST(Stages, Parsing) {
  PipelineConfig c;
  EXPECT_EQ(parse_stages("forge,train", c), (std::set<Stage>{Stage::kForge, Stage::kTrain}));
  EXPECT_FALSE(parse_stages("all", c).contains(Stage::kEvalFr));
  c.fr_table = "x.csv";
  EXPECT_TRUE(parse_stages("all", c).contains(Stage::kEvalFr));
  EXPECT_THROW(parse_stage("polish"), UsageError);
  EXPECT_THROW(parse_stages("", c), UsageError);
}

PipelineConfig small_config(const testing::TempDir& dir, int images) {
  write_synthetic_corpus(dir / "pristine", images, 256, 3);
  PipelineConfig c;
  c.corpus = dir / "pristine";
  c.work = dir / "work";
  c.manifest.include_combined = false;
  c.encoder.crop_size = 64;
  c.encoder.batch_size = 2;
  c.encoder.max_steps = 1;
  c.seed = 1;
  c.finalize();
  return c;
}

TEST(Run, ForgeOneImageWithoutCombined) {
  testing::TempDir dir("pipe_forge");
  const auto c = small_config(dir, 1);
  const auto r = run_pipeline(c, {Stage::kForge});
  const Manifest m = read_manifest(PipelinePaths(c.work).manifest);
  EXPECT_EQ(m.entries.size(), 400u);
  EXPECT_EQ(r.executed, std::vector<Stage>{Stage::kForge});
  EXPECT_TRUE(std::filesystem::exists(PipelinePaths(c.work).summary));
}

TEST(Run, MissingUpstreamArtifact) {
  testing::TempDir dir("pipe_missing");
  const auto c = small_config(dir, 1);
  try {
    run_pipeline(c, {Stage::kTrain});
    FAIL() << "expected a DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing upstream artifact"), std::string::npos);
  }
}

TEST(Run, ManifestFromAnotherSeedRejected) {
  testing::TempDir dir("pipe_seed");
  auto c = small_config(dir, 1);
  run_pipeline(c, {Stage::kForge});
  c.seed = 2;
  c.finalize();
  EXPECT_THROW(run_pipeline(c, {Stage::kTrain}), DataError);
}

TEST(Run, CheckpointFromAnotherManifestRejected) {
  testing::TempDir dir("pipe_ckpt");
  auto c = small_config(dir, 1);
  run_pipeline(c, {Stage::kForge, Stage::kTrain});
  // Re-forge with a different combined setting; the old checkpoint no longer fits.
  c.manifest.include_combined = true;
  c.finalize();
  run_pipeline(c, {Stage::kForge});
  const auto refs = list_corpus(c.corpus);
  const auto toy = write_toy_tables(dir / "rated", {refs[0].second}, 12, 4);
  c.dataset = toy.nr_table;
  try {
    run_pipeline(c, {Stage::kExtract});
    FAIL() << "expected a DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("fingerprint"), std::string::npos) << e.what();
  }
}

TEST(Run, EndToEndOnToyTables) {
  testing::TempDir dir("pipe_e2e");
  auto c = small_config(dir, 2);
  const auto refs = list_corpus(c.corpus);
  const auto toy = write_toy_tables(dir / "rated", {refs[0].second, refs[1].second}, 20, 4);
  c.dataset = toy.nr_table;
  c.fr_table = toy.fr_table;
  c.protocol.iterations = 2;
  c.formats = {ReportFormat::kJson, ReportFormat::kCsv};
  c.finalize();
  const auto r = run_pipeline(c, parse_stages("all", c));
  ASSERT_TRUE(r.report.has_value());
  ASSERT_TRUE(r.fr_report.has_value());
  EXPECT_EQ(r.report->datasets.size(), 1u);
  EXPECT_EQ(r.report->datasets[0].rows, 20);
  const PipelinePaths paths(c.work);
  for (const auto& p : {paths.manifest, paths.checkpoint, paths.features, paths.model})
    EXPECT_TRUE(std::filesystem::exists(p)) << p;
  const EvalReport back = read_report(paths.report_stem.string() + ".json");
  EXPECT_EQ(back.datasets[0].iterations.size(), 2u);
  EXPECT_TRUE(r.fingerprints.contains("manifest.jsonl"));
}

}  // namespace
}  // namespace triqa
