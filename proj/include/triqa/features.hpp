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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triqa/encoder.hpp"
#include "triqa/image.hpp"
#include "triqa/nn.hpp"

namespace triqa {

enum class Provenance { kContent, kQualityFull, kQualityHalf, kQuality, kFused };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view name);

struct FeatureVector {
  std::vector<double> values;
  Provenance provenance = Provenance::kContent;

  size_t dim() const { return values.size(); }
};

/// Factor-2 reduction with the antialiased bilinear (triangle) filter: each
/// output pixel is the separable [1, 3, 3, 1] / 8 weighting of the four
/// nearest input rows and columns, borders reflected, rounded once to 8 bits.
/// Output size is floor(h / 2) x floor(w / 2).
ImageBuffer downsample_half(const ImageBuffer& img);

/// Frozen classification-style encoder for the content branch. Without a
/// weights file its parameters are a fixed seeded initialization, which is
/// what the desk-scale tests use.
class ContentEncoder {
 public:
  static constexpr uint64_t kDefaultSeed = 0x636f6e74656e74ULL;

  explicit ContentEncoder(Preset preset = Preset::kDesk, uint64_t seed = kDefaultSeed);

  /// Loads raw float32 parameters (Network::parameter_bytes layout).
  static ContentEncoder from_weights(Preset preset, const std::filesystem::path& path);

  Preset preset() const { return preset_; }
  uint64_t seed() const { return seed_; }
  int dim() const { return network_.spec().feature_dim(); }
  std::string fingerprint() const;

  std::vector<float> pooled(const ImageBuffer& img) const;

 private:
  Preset preset_;
  uint64_t seed_;
  nn::Network network_;
};

/// Globally pooled content features at native resolution.
FeatureVector extract_content_features(const ImageBuffer& img, const ContentEncoder& encoder);

enum class QualityScales { kFull, kHalf, kBoth };

QualityScales parse_scales(std::string_view text);  // "full", "half", "full,half"
std::string_view to_string(QualityScales scales);

/// Pooled pre-projection quality features. kBoth concatenates the native
/// resolution and the downsample_half result (full first). Throws DataError
/// when the half-scale image falls below the backbone minimum.
FeatureVector extract_quality_features(const ImageBuffer& img, const Checkpoint& ckpt,
                                       QualityScales scales = QualityScales::kBoth);

/// Dimension of extract_quality_features for `ckpt` and `scales`.
int quality_feature_dim(const Checkpoint& ckpt, QualityScales scales);

/// Content first, then quality. Throws UsageError on wrong provenance.
FeatureVector fuse(const FeatureVector& content, const FeatureVector& quality);

/// What produced a fused feature vector. Stored with features and with
/// regression models so that mismatched artifacts are refused.
struct FeatureSource {
  int content_dim = 0;
  int quality_dim = 0;
  QualityScales scales = QualityScales::kBoth;
  std::string checkpoint_fingerprint;
  std::string content_fingerprint;
  Preset content_preset = Preset::kDesk;
  uint64_t content_seed = ContentEncoder::kDefaultSeed;

  bool operator==(const FeatureSource&) const = default;
};

/// Row-per-image matrix of fused features plus its provenance metadata.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // rows x (content_dim + quality_dim)
  std::vector<std::string> images;
  int content_dim = 0;
  int quality_dim = 0;
  QualityScales scales = QualityScales::kBoth;
  std::string checkpoint_fingerprint;
  std::string content_fingerprint;
  Preset content_preset = Preset::kDesk;
  uint64_t content_seed = ContentEncoder::kDefaultSeed;
  /// Master seed of the run that produced the features (metadata only).
  uint64_t seed = 0;

  FeatureSource source() const;

  /// SHA-256 over the values and the metadata above.
  std::string fingerprint() const;
};

/// Content + quality features for every image, in order.
FeatureMatrix extract_feature_matrix(const std::vector<std::filesystem::path>& images,
                                     const std::vector<std::string>& names,
                                     const Checkpoint& ckpt, const ContentEncoder& content,
                                     QualityScales scales = QualityScales::kBoth);

/// `<path>` holds raw little-endian float64 values (row-major) and
/// `<path>.json` the sidecar (dims, provenance, fingerprints, image list,
/// digest of the binary).
void write_features(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace triqa
