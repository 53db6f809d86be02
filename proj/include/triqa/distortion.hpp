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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triqa/image.hpp"

namespace triqa {

/// The registered synthetic distortion families.
enum class DistortionId : uint8_t {
  kGaussianBlur,
  kLensBlur,
  kMotionBlur,
  kColorDiffuse,
  kColorShift,
  kColorQuantization,
  kColorSaturate1,
  kColorSaturate2,
  kJpeg,
  kJpeg2000,
  kBrighten,
  kDarken,
  kMeanShift,
  kWhiteNoise,
  kWhiteNoiseColor,
  kImpulseNoise,
  kMultiplicativeNoise,
  kDenoiseOversmooth,
  kJitter,
  kPixelate,
};

inline constexpr int kNumDistortions = 20;
inline constexpr int kNumLevels = 5;

/// All registered ids in declaration order.
std::span<const DistortionId> all_distortions();

std::string_view to_string(DistortionId id);

/// Inverse of to_string; nullopt for unregistered names.
std::optional<DistortionId> parse_distortion(std::string_view name);

/// Partition of the registered distortions into named groups. Combined
/// triplets pair distortions from different groups only.
class DistortionGrouping {
 public:
  DistortionGrouping() = default;

  /// Validates that `groups` partitions all registered distortions.
  /// Throws ConfigError otherwise.
  DistortionGrouping(std::string version,
                     std::map<std::string, std::vector<DistortionId>> groups);

  /// Unvalidated construction for partial rosters (tests, custom studies).
  /// Still rejects overlaps and empty groups.
  static DistortionGrouping partial(
      std::string version,
      std::map<std::string, std::vector<DistortionId>> groups);

  const std::string& version() const { return version_; }

  /// Groups keyed by name; iteration order is lexicographic.
  const std::map<std::string, std::vector<DistortionId>>& groups() const {
    return groups_;
  }

  /// Group of `id`; throws ConfigError if `id` is not in the table.
  const std::string& group_of(DistortionId id) const;

  bool contains(DistortionId id) const;

  /// Unordered cross-group pairs. `first` always comes from the
  /// lexicographically earlier group and is applied first.
  std::vector<std::pair<DistortionId, DistortionId>> cross_group_pairs() const;

  /// Plain-text serialization in the grouping file format.
  std::string to_text() const;

 private:
  std::string version_;
  std::map<std::string, std::vector<DistortionId>> groups_;
};

/// The shipped default grouping (version "kadid20-5g-v1").
const DistortionGrouping& default_grouping();

/// Parses the grouping file format:
///
///     # comment
///     version = kadid20-5g-v1
///     [groups]
///     blur = gaussian-blur, lens-blur, motion-blur
///     ...
///
/// Throws ConfigError on syntax errors, unregistered distortion names, or a
/// table that does not partition the roster.
DistortionGrouping parse_grouping(std::string_view text);
DistortionGrouping load_grouping(const std::filesystem::path& path);

/// Resolves a grouping version tag against the built-in table; throws
/// ConfigError for unknown versions.
const DistortionGrouping& grouping_for_version(std::string_view version);

/// One distortion family at one severity level.
struct DistortionSpec {
  DistortionId id = DistortionId::kGaussianBlur;
  int level = 1;
  std::string group;

  /// "white-noise@3"
  std::string label() const;

  bool operator==(const DistortionSpec&) const = default;
};

/// Throws UsageError unless `level` is in 1..5.
void validate_level(int level);

struct DistortionCatalog {
  std::vector<DistortionSpec> entries;  // type-major, level-minor
  DistortionGrouping grouping;
};

/// Every registered (type, level) pair annotated with its group under
/// `grouping`. Throws ConfigError if the grouping references a distortion
/// outside the registry or omits one.
DistortionCatalog distortion_catalog(
    const DistortionGrouping& grouping = default_grouping());

/// Severity parameter used for `level` of `id` (sigma, radius, quality ...).
double level_parameter(DistortionId id, int level);

/// Smallest image side that `spec` can be applied to.
int min_support(const DistortionSpec& spec);

/// Applies one distortion. Pure: the input is never mutated and stochastic
/// distortions are fully determined by `seed`. Different levels of one
/// family share their random fields for a given seed, so severity grows
/// monotonically.
ImageBuffer apply_distortion(const ImageBuffer& img, const DistortionSpec& spec,
                             uint64_t seed);

/// Seed used for step `index` of a chain seeded with `chain_seed`. Depends
/// only on the step position and distortion family, so chains sharing a
/// prefix render that prefix identically.
uint64_t step_seed(uint64_t chain_seed, size_t index, DistortionId id);

/// Left-to-right application of `chain`; an empty chain returns a copy.
ImageBuffer apply_chain(const ImageBuffer& img,
                        std::span<const DistortionSpec> chain,
                        uint64_t chain_seed);

}  // namespace triqa
