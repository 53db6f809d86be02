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
#include <random>
#include <string_view>

namespace triqa {

/// Platform-stable 64-bit hash of a byte string (FNV-1a followed by a
/// SplitMix64 finalizer). Unlike std::hash its value is fixed forever, so it
/// is safe to persist seeds derived from it.
uint64_t stable_hash(std::string_view bytes);

/// SplitMix64 finalizer.
uint64_t mix64(uint64_t x);

/// Named sub-seed of `parent`. All randomness in the pipeline flows from one
/// master seed through chains of these calls.
uint64_t derive_seed(uint64_t parent, std::string_view name);
uint64_t derive_seed(uint64_t parent, uint64_t index);

/// Named sub-seed streams of the master seed.
namespace streams {
inline constexpr std::string_view kForge = "forge";
inline constexpr std::string_view kCrops = "crops";
inline constexpr std::string_view kShuffle = "shuffle";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kSplits = "splits";
inline constexpr std::string_view kContent = "content";
}  // namespace streams

/// Random source whose outputs are bit-identical on every conforming
/// platform: the engine is std::mt19937_64 (fully specified by the
/// standard) and all distributions are implemented here rather than taken
/// from <random>, whose distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Unbiased (rejection sampling).
  uint64_t below(uint64_t n);

  /// Standard normal via the Box-Muller transform.
  double normal();

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      const uint64_t j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace triqa
