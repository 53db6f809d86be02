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

#include "triqa/synthetic.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "triqa/dataset.hpp"
#include "triqa/distortion.hpp"
#include "triqa/errors.hpp"
#include "triqa/image.hpp"
#include "triqa/seeding.hpp"

namespace triqa {

namespace {

std::string numbered(const char* prefix, int i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%03d%s", prefix, i, suffix);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          int count, int size, uint64_t seed) {
  if (count < 1) throw UsageError("corpus size must be at least 1");
  if (size < kMinRenderSide) {
    throw UsageError("image size must be at least " + std::to_string(kMinRenderSide));
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string());
  std::vector<std::filesystem::path> out;
  for (int i = 0; i < count; ++i) {
    const auto path = dir / numbered("pristine_", i, ".png");
    write_png(synthesize_pristine(size, size, derive_seed(seed, static_cast<uint64_t>(i))), path);
    out.push_back(path);
  }
  return out;
}

ToyTables write_toy_tables(const std::filesystem::path& dir,
                           const std::vector<std::filesystem::path>& references, int count,
                           uint64_t seed) {
  if (references.empty()) throw UsageError("toy tables need at least one reference image");
  if (count < 2) throw UsageError("toy tables need at least two rows");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string());
  Rng rng(derive_seed(seed, "toy-mos"));
  const auto ids = all_distortions();
  std::vector<ImageBuffer> refs;
  for (const auto& r : references) refs.push_back(read_image(r));

  ToyTables t{dir / "toy_mos.csv", dir / "toy_fr.csv"};
  std::ofstream nr(t.nr_table), fr(t.fr_table);
  if (!nr || !fr) throw DataError("cannot write toy tables in " + dir.string());
  nr << "path,mos\n";
  fr << "reference_path,distorted_path,mos\n";
  for (int i = 0; i < count; ++i) {
    const size_t r = static_cast<size_t>(i) % refs.size();
    const DistortionId id = ids[rng.below(ids.size())];
    const int level = 1 + static_cast<int>(rng.below(kNumLevels));
    const double mos = 90.0 - 17.5 * (level - 1) + rng.uniform(-3.0, 3.0);
    const auto name = numbered("rated_", i, ".png");
    write_png(apply_distortion(refs[r], {id, level, ""}, derive_seed(seed, static_cast<uint64_t>(i))),
              dir / name);
    const std::string ref_rel =
        std::filesystem::absolute(references[r]).lexically_relative(std::filesystem::absolute(dir)).generic_string();
    nr << name << ',' << fmt(mos) << '\n';
    fr << ref_rel << ',' << name << ',' << fmt(mos) << '\n';
  }
  if (!nr || !fr) throw DataError("failed writing toy tables in " + dir.string());
  return t;
}

}  // namespace triqa
