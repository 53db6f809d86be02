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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "triqa/distortion.hpp"
#include "triqa/image.hpp"

namespace triqa {

/// Ordered degradation steps applied to a pristine image. Length 0 is the
/// pristine image itself.
struct DegradationChain {
  std::vector<DistortionSpec> steps;

  bool pristine() const { return steps.empty(); }

  /// "pristine", "jpeg@3", "white-noise@1+jitter@3".
  std::string rank_key() const;

  /// True when `other` is a severity extension of this chain: the same
  /// single distortion at a higher level, or this chain as a strict prefix.
  bool precedes(const DegradationChain& other) const;

  bool operator==(const DegradationChain&) const = default;
};

/// Parses a rank key back into a chain; groups are resolved in `grouping`.
DegradationChain parse_chain(const std::string& rank_key,
                             const DistortionGrouping& grouping);

enum class TripletKind : uint8_t { kSingle, kCombined };

std::string_view to_string(TripletKind kind);

struct TripletSpec {
  std::string image_id;
  DegradationChain anchor;
  DegradationChain positive;
  DegradationChain negative;
  TripletKind kind = TripletKind::kSingle;
  /// Chain seed shared by all three members.
  uint64_t seed = 0;

  bool operator==(const TripletSpec&) const = default;
};

/// Throws DataError if `t` violates the ordering or kind invariants.
void validate_triplet(const TripletSpec& t, const DistortionGrouping& grouping);

/// All strictly increasing rank triples over `n_ranks` ranks in
/// lexicographic order; C(n_ranks, 3) of them. Rank 0 is pristine when
/// ranks index {pristine, level 1..5}.
std::vector<std::array<int, 3>> enumerate_single_triplets(int n_ranks);

/// Cross-group combined templates (image id and seed left empty). For every
/// cross-group pair (A, B) and every (p, q) in positive_levels x
/// added_levels: [pristine, A@p, A@p + B@q].
std::vector<TripletSpec> enumerate_combined_triplets(
    const DistortionGrouping& grouping, const std::vector<int>& positive_levels,
    const std::vector<int>& added_levels);

struct TripletCounts {
  uint64_t single = 0;
  uint64_t combined = 0;
  uint64_t total() const { return single + combined; }
  bool operator==(const TripletCounts&) const = default;
};

struct ManifestOptions {
  bool include_combined = true;
  std::vector<int> positive_levels = {1, 3};
  std::vector<int> added_levels = {1, 3};
};

struct ManifestHeader {
  std::vector<std::string> image_ids;
  std::string grouping_version;
  uint64_t master_seed = 0;
  ManifestOptions options;
  TripletCounts counts;
};

struct Manifest {
  ManifestHeader header;
  std::vector<TripletSpec> entries;

  TripletCounts recount() const;
};

/// Chain seed for one corpus image.
uint64_t image_seed(uint64_t master_seed, const std::string& image_id);

/// Per image: every distortion x every single rank triple, followed (when
/// options.include_combined) by every combined template. Deterministic.
/// Throws UsageError on empty or duplicate image ids.
Manifest build_manifest(const std::vector<std::string>& image_ids,
                        const DistortionGrouping& grouping, uint64_t master_seed,
                        const ManifestOptions& options = {});

/// JSON-Lines: one header object, then one TripletSpec per line.
void write_manifest(const Manifest& manifest, std::ostream& out);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Reads and validates a manifest: the grouping version must be known,
/// every entry must satisfy the triplet invariants, the stored counts must
/// match the entries and no entry may repeat. Throws DataError/ConfigError.
Manifest read_manifest(std::istream& in);
Manifest read_manifest(const std::filesystem::path& path);

/// SHA-256 (hex) of the serialized manifest.
std::string manifest_fingerprint(const Manifest& manifest);

/// Renders the three members of `spec` from `pristine`. Chains share the
/// triplet seed, so a negative that extends the positive reproduces it as
/// its intermediate state.
std::array<ImageBuffer, 3> render_triplet(const TripletSpec& spec,
                                          const ImageBuffer& pristine);

/// Memoizing renderer for training: caches every single-step render of each
/// image so a triplet costs at most one further distortion. Output equals
/// apply_chain on the pristine image.
class ChainRenderer {
 public:
  void add_image(const std::string& image_id, ImageBuffer pristine);
  bool has_image(const std::string& image_id) const;
  const ImageBuffer& pristine(const std::string& image_id) const;

  ImageBuffer render(const std::string& image_id, const DegradationChain& chain,
                     uint64_t seed);
  std::array<ImageBuffer, 3> render(const TripletSpec& spec);

 private:
  struct Entry {
    ImageBuffer pristine;
    std::map<std::pair<DistortionId, int>, ImageBuffer> first_steps;
    uint64_t seed = 0;
    bool seeded = false;
  };
  std::map<std::string, Entry> images_;
};

}  // namespace triqa
