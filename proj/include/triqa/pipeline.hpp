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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "triqa/encoder.hpp"
#include "triqa/eval.hpp"
#include "triqa/features.hpp"
#include "triqa/svr.hpp"
#include "triqa/triplets.hpp"

namespace triqa {

/// Everything a run needs. Settings are addressed as "section.key" both in
/// config files and in command-line overrides; see config/pipeline.ini for
/// the documented key list.
struct PipelineConfig {
  // [paths]
  std::filesystem::path corpus;          // directory of pristine training images
  std::filesystem::path work = "triqa-work";
  std::filesystem::path dataset;         // MOS table for extract / fit-head / eval
  std::filesystem::path images;          // image root of `dataset`
  std::filesystem::path fr_table;        // reference_path,distorted_path,mos table
  std::filesystem::path fr_images;
  std::filesystem::path content_weights; // optional frozen content weights

  // [run]
  uint64_t seed = 0;

  // [forge]
  std::string grouping_version = "kadid20-5g-v1";
  ManifestOptions manifest;

  // [train]
  EncoderConfig encoder;

  // [features]
  QualityScales scales = QualityScales::kBoth;
  uint64_t content_seed = ContentEncoder::kDefaultSeed;

  // [head] and [eval]
  SvrGrid grid;
  SplitProtocol protocol;
  std::string dataset_name;
  std::vector<ReportFormat> formats{ReportFormat::kJson};

  /// Applies one "section.key = value" setting. Throws ConfigError for an
  /// unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);

  /// Propagates the master seed into the encoder and protocol, then checks
  /// every setting. Throws ConfigError.
  void finalize();

  /// Resolved settings in config-file syntax (every key, sorted by section).
  std::string to_text() const;
};

/// Reads an INI-style config file (sections, "key = value", ';' or '#'
/// comment lines) on top of `base`. Throws ConfigError.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

enum class Stage { kForge, kTrain, kExtract, kFitHead, kEval, kEvalFr, kAblation };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);
/// Comma-separated list, or "all" (forge..eval, plus eval-fr when a table is
/// configured).
std::set<Stage> parse_stages(std::string_view list, const PipelineConfig& config);

/// Artifact locations inside config.work.
struct PipelinePaths {
  std::filesystem::path manifest;
  std::filesystem::path manifest_without;
  std::filesystem::path checkpoint;
  std::filesystem::path checkpoint_without;
  std::filesystem::path train_log;
  std::filesystem::path features;
  std::filesystem::path model;
  std::filesystem::path report_stem;
  std::filesystem::path fr_report_stem;
  std::filesystem::path ablation_stem;
  std::filesystem::path summary;

  explicit PipelinePaths(const std::filesystem::path& work);
};

struct PipelineResult {
  std::vector<Stage> executed;
  /// artifact name -> SHA-256 of its bytes
  std::map<std::string, std::string> fingerprints;
  std::optional<EvalReport> report;
  std::optional<EvalReport> fr_report;
  std::optional<AblationReport> ablation;
};

/// Pristine images of a corpus directory (PNG, JPEG, BMP, TIFF), sorted by
/// file name; ids are the file stems. Throws DataError on an empty directory
/// or duplicate stems.
std::vector<std::pair<std::string, std::filesystem::path>> list_corpus(
    const std::filesystem::path& dir);

/// Loads every corpus image into a renderer (minimum side enforced).
ChainRenderer load_corpus(const std::vector<std::pair<std::string, std::filesystem::path>>& items);

/// Content encoder described by the config (weights file or seeded init).
ContentEncoder make_content_encoder(const PipelineConfig& config);

/// Throws DataError when `ckpt` was not trained on `manifest`.
void check_checkpoint_matches(const Checkpoint& ckpt, const Manifest& manifest,
                              const std::filesystem::path& ckpt_path);

/// Runs the requested stages in dependency order. Upstream artifacts not
/// produced in this run are read from config.work and verified against the
/// config by fingerprint. Throws DataError for missing or mismatched
/// artifacts.
PipelineResult run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages);

}  // namespace triqa
