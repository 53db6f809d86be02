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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triqa/dataset.hpp"
#include "triqa/encoder.hpp"
#include "triqa/features.hpp"
#include "triqa/image.hpp"

namespace triqa {

/// u.v / (|u| |v|), clamped to [-1, 1]. Identical nonzero inputs give exactly
/// 1. Throws UsageError on a dimension mismatch, NumericalError on a zero
/// vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct FRScore {
  double value = 0.0;  // higher means closer to the reference
  std::string reference;
  std::string distorted;
};

/// Training-free full-reference score: cosine similarity of the quality
/// branch features of both images (content branch unused).
FRScore score_fr(const ImageBuffer& reference, const ImageBuffer& distorted,
                 const Checkpoint& ckpt, QualityScales scales = QualityScales::kBoth,
                 std::string reference_id = {}, std::string distorted_id = {});

struct FROptions {
  QualityScales scales = QualityScales::kBoth;
  bool logistic_fit = false;
};

struct FRDatasetResult {
  std::string dataset;
  std::vector<FRScore> scores;
  std::vector<double> mos;
  /// Empty when the correlation is undefined (constant scores or MOS).
  std::optional<double> srcc;
  std::optional<double> plcc;
  std::optional<double> plcc_logistic;
  std::string degenerate_reason;
  std::string checkpoint_before;
  std::string checkpoint_after;

  bool degenerate() const { return !srcc.has_value(); }
};

/// Scores every (reference, distorted) row and correlates the scores with
/// MOS. Never updates `ckpt`. Throws DataError when a row lacks a reference.
FRDatasetResult evaluate_fr(const DatasetTable& table, const Checkpoint& ckpt,
                            const FROptions& options = {});

}  // namespace triqa
