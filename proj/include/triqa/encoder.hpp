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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "triqa/image.hpp"
#include "triqa/nn.hpp"
#include "triqa/triplets.hpp"

namespace triqa {

/// Backbone scale. `kPaper` matches the published feature widths (768 per
/// quality scale, 1,536 content); `kDesk` is a ~1M-parameter network that
/// trains on a laptop CPU.
enum class Preset { kDesk, kPaper };

std::string_view to_string(Preset preset);
Preset parse_preset(std::string_view name);

/// Quality-branch architecture for `preset` with a projection head of
/// `embedding_dim`.
nn::BackboneSpec quality_backbone(Preset preset, int embedding_dim = 128);

/// Frozen content-branch architecture (no head).
nn::BackboneSpec content_backbone(Preset preset);

struct EncoderConfig {
  Preset preset = Preset::kDesk;
  int embedding_dim = 128;
  double margin = 1.5;
  double learning_rate = 5e-4;
  double adam_eps = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::string schedule = "cosine";
  int crop_size = 256;
  int epochs = 1;
  int batch_size = 64;
  uint64_t seed = 0;
  /// Validation cadence as a fraction of the run.
  double validation_fraction = 0.1;
  /// Cap on validation triplets per evaluation (0 = all).
  int max_validation_triplets = 256;
  /// Return the best-validation checkpoint instead of the final one.
  bool keep_best = false;
  /// Stop after this many optimizer steps (0 = run every epoch in full).
  int64_t max_steps = 0;

  /// Throws ConfigError on invalid settings.
  void validate() const;
};

struct QualityEmbedding {
  std::vector<double> values;
  size_t dim() const { return values.size(); }
};

/// Trained (or freshly initialized) quality encoder.
struct Checkpoint {
  EncoderConfig config;
  nn::Network network;
  int64_t step = 0;
  std::string manifest_fingerprint;

  /// SHA-256 of the parameter bytes; changes with any weight update.
  std::string fingerprint() const;
};

/// Randomly initialized encoder seeded from config.seed.
Checkpoint init_checkpoint(const EncoderConfig& config);

/// Self-describing container: magic, JSON header (config, step, manifest
/// fingerprint, tensor table, parameter digest) and raw float32 tensors.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 128-d quality embedding of the whole image. Throws DataError if the image
/// is smaller than the backbone's total stride.
QualityEmbedding embed(const ImageBuffer& img, const Checkpoint& ckpt);

struct CropWindow {
  int y = 0;
  int x = 0;
  int size = 0;
  bool operator==(const CropWindow&) const = default;
};

/// Offset drawn uniformly over the valid range of an h x w image.
CropWindow draw_crop(int height, int width, int crop, uint64_t seed);

struct CroppedTriplet {
  std::array<ImageBuffer, 3> images;
  CropWindow window;
};

/// Cuts the same window out of all three members. Throws DataError when the
/// members differ in size or are smaller than `crop`.
CroppedTriplet synchronized_crop(const ImageBuffer& anchor, const ImageBuffer& positive,
                                 const ImageBuffer& negative, int crop, uint64_t seed);

struct OrderingStats {
  double mean_loss = 0.0;
  /// Fraction of triplets with d(a, p) < d(a, n).
  double accuracy = 0.0;
  size_t count = 0;
};

/// Loss and ordering accuracy over (a deterministic subsample of) `manifest`
/// using centre crops of config.crop_size. `max_triplets` = 0 uses all.
OrderingStats evaluate_ordering(const Manifest& manifest, ChainRenderer& corpus,
                                const Checkpoint& ckpt, size_t max_triplets = 0);

struct TrainProgress {
  int64_t step = 0;
  int64_t total_steps = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean over the steps since the last report
  std::optional<OrderingStats> validation;
};

struct TrainResult {
  Checkpoint checkpoint;
  /// Mean loss of every optimizer step, in order.
  std::vector<double> step_losses;
  std::vector<TrainProgress> reports;
};

using ProgressCallback = std::function<void(const TrainProgress&)>;

/// Mini-batch Adam with cosine decay over the triplet margin loss, on
/// rendered and synchronously cropped triplets in a seeded shuffle order.
/// Every `validation_fraction` of the run a report is emitted (with
/// validation statistics when `validation` is given). Throws DataError when a
/// manifest image is missing from `corpus` and NumericalError on a
/// non-finite loss.
TrainResult train(const Manifest& manifest, ChainRenderer& corpus,
                  const EncoderConfig& config, const Manifest* validation = nullptr,
                  const ProgressCallback& progress = {});

}  // namespace triqa
