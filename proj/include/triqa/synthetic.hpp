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
#include <vector>

namespace triqa {

/// Writes `count` synthetic pristine PNGs (`pristine_000.png`, ...) of size
/// `size` x `size` into `dir` and returns their paths.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          int count, int size, uint64_t seed);

struct ToyTables {
  std::filesystem::path nr_table;  // path,mos
  std::filesystem::path fr_table;  // reference_path,distorted_path,mos
};

/// Renders `count` distorted versions of `references` into `dir` (one random
/// distortion type and level each) and writes MOS tables for them. The toy
/// MOS falls linearly with severity level plus a small seeded jitter, on a
/// 0-100 scale. Paths inside the tables are relative to `dir`.
ToyTables write_toy_tables(const std::filesystem::path& dir,
                           const std::vector<std::filesystem::path>& references, int count,
                           uint64_t seed);

}  // namespace triqa
