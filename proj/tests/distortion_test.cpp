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


#include "triqa/distortion.hpp"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "triqa/errors.hpp"

namespace triqa {
namespace {

TEST(Catalog, TwentyTypesFiveLevels) {
  const auto catalog = distortion_catalog();
  EXPECT_EQ(all_distortions().size(), 20u);
  EXPECT_EQ(catalog.entries.size(), 100u);
  std::set<std::pair<DistortionId, int>> seen;
  for (const auto& e : catalog.entries) {
    EXPECT_GE(e.level, 1);
    EXPECT_LE(e.level, 5);
    EXPECT_EQ(e.group, catalog.grouping.group_of(e.id));
    seen.insert({e.id, e.level});
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Catalog, NamesRoundTrip) {
  for (const DistortionId id : all_distortions()) {
    const auto parsed = parse_distortion(to_string(id));
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(*parsed, id);
  }
  EXPECT_FALSE(parse_distortion("chromatic-aberration").has_value());
}

TEST(Grouping, DefaultPartitionsTheRoster) {
  const auto& g = default_grouping();
  std::multiset<DistortionId> members;
  std::vector<size_t> sizes;
  for (const auto& [name, ids] : g.groups()) {
    sizes.push_back(ids.size());
    members.insert(ids.begin(), ids.end());
  }
  EXPECT_EQ(members.size(), 20u);
  for (const DistortionId id : all_distortions()) EXPECT_EQ(members.count(id), 1u);
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<size_t>{2, 3, 3, 5, 7}));
}

// Brute force over every unordered pair of registered distortions.
TEST(Grouping, DefaultHas152CrossGroupPairs) {
  const auto& g = default_grouping();
  const auto ids = all_distortions();
  size_t brute = 0;
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      if (g.group_of(ids[i]) != g.group_of(ids[j])) ++brute;
  EXPECT_EQ(brute, 152u);
  EXPECT_EQ(g.cross_group_pairs().size(), brute);
  EXPECT_EQ(brute * 4, 608u);
}

TEST(Grouping, FirstOfPairComesFromEarlierGroup) {
  const auto& g = default_grouping();
  for (const auto& [a, b] : g.cross_group_pairs()) EXPECT_LT(g.group_of(a), g.group_of(b));
}

TEST(Grouping, SingleGroupHasNoCrossPairs) {
  std::vector<DistortionId> all(all_distortions().begin(), all_distortions().end());
  const DistortionGrouping g("one", {{"everything", all}});
  EXPECT_TRUE(g.cross_group_pairs().empty());
}

TEST(Grouping, ShippedFileMatchesEmbeddedDefault) {
  const auto loaded = load_grouping(TRIQA_SOURCE_DIR "/config/grouping_default.cfg");
  EXPECT_EQ(loaded.version(), default_grouping().version());
  EXPECT_EQ(loaded.groups(), default_grouping().groups());
}

TEST(Grouping, TextRoundTrip) {
  const auto& g = default_grouping();
  const auto back = parse_grouping(g.to_text());
  EXPECT_EQ(back.version(), g.version());
  EXPECT_EQ(back.groups(), g.groups());
}

TEST(Grouping, UnregisteredNameIsAConfigError) {
  EXPECT_THROW(parse_grouping("version = x\n[groups]\na = white-noise, sparkle\n"), ConfigError);
}

TEST(Grouping, OverlapAndOmissionAreConfigErrors) {
  std::vector<DistortionId> all(all_distortions().begin(), all_distortions().end());
  std::map<std::string, std::vector<DistortionId>> overlap{{"a", all}, {"b", {DistortionId::kJpeg}}};
  EXPECT_THROW(DistortionGrouping("v", overlap), ConfigError);
  all.pop_back();
  EXPECT_THROW(DistortionGrouping("v", {{"a", all}}), ConfigError);
  EXPECT_THROW(parse_grouping("version = v\n[groups]\na = jpeg\n"), ConfigError);
}

TEST(Grouping, MalformedFilesAreConfigErrors) {
  EXPECT_THROW(parse_grouping("version = v\n[other]\n"), ConfigError);
  EXPECT_THROW(parse_grouping("colour = v\n"), ConfigError);
  EXPECT_THROW(parse_grouping("version v\n"), ConfigError);
  EXPECT_THROW(load_grouping("/nonexistent/grouping.cfg"), ConfigError);
  EXPECT_THROW(grouping_for_version("no-such-version"), ConfigError);
}

TEST(Levels, OutsideOneToFiveRejected) {
  EXPECT_THROW(validate_level(0), UsageError);
  EXPECT_THROW(validate_level(6), UsageError);
  const ImageBuffer img = synthesize_pristine(32, 32, 1);
  EXPECT_THROW(apply_distortion(img, {DistortionId::kJpeg, 6, ""}, 1), UsageError);
}

TEST(Apply, UnsupportedIdRejected) {
  const ImageBuffer img = synthesize_pristine(32, 32, 1);
  EXPECT_THROW(apply_distortion(img, {static_cast<DistortionId>(200), 1, ""}, 1), UsageError);
}

TEST(Apply, TooSmallForKernelSupport) {
  const DistortionSpec spec{DistortionId::kGaussianBlur, 5, "blur"};
  const int support = min_support(spec);
  ASSERT_GT(support, 2);
  const ImageBuffer small = synthesize_pristine(support - 1, support + 4, 1);
  EXPECT_THROW(apply_distortion(small, spec, 1), DataError);
  EXPECT_NO_THROW(apply_distortion(synthesize_pristine(support, support, 1), spec, 1));
}

TEST(Apply, ShapePreservedAndInputUntouched) {
  const ImageBuffer img = synthesize_pristine(96, 120, 3);
  const ImageBuffer copy = img;
  for (const auto& spec : distortion_catalog().entries) {
    const ImageBuffer out = apply_distortion(img, spec, 11);
    EXPECT_EQ(out.height(), 96) << spec.label();
    EXPECT_EQ(out.width(), 120) << spec.label();
  }
  EXPECT_EQ(img, copy);
}

TEST(Apply, DeterministicInSeed) {
  const ImageBuffer img = synthesize_pristine(96, 96, 5);
  for (const auto& spec : distortion_catalog().entries) {
    EXPECT_EQ(apply_distortion(img, spec, 42), apply_distortion(img, spec, 42)) << spec.label();
  }
  const DistortionSpec noise{DistortionId::kWhiteNoise, 1, "noise-and-spatial"};
  EXPECT_NE(apply_distortion(img, noise, 1), apply_distortion(img, noise, 2));
}

// PSNR to pristine never rises with level: strictly falls for at least 90% of
// steps, and any flat step stays within half a decibel.
TEST(Apply, SeverityIsMonotoneOnFiveImages) {
  int steps = 0, strict = 0;
  for (uint64_t s = 0; s < 5; ++s) {
    const ImageBuffer img = synthesize_pristine(96, 96, 300 + s);
    for (const DistortionId id : all_distortions()) {
      double prev = std::numeric_limits<double>::infinity();
      for (int level = 1; level <= kNumLevels; ++level) {
        const double q = psnr(img, apply_distortion(img, {id, level, ""}, 17 + s));
        if (level > 1) {
          ++steps;
          if (q < prev) ++strict;
          EXPECT_LE(q, prev + 0.5) << to_string(id) << " level " << level << " image " << s;
        }
        prev = std::min(prev, q);
      }
    }
  }
  EXPECT_GE(strict, 0.9 * steps) << strict << " of " << steps;
}

TEST(Chain, EmptyChainIsACopy) {
  const ImageBuffer img = synthesize_pristine(48, 48, 2);
  EXPECT_EQ(apply_chain(img, {}, 9), img);
}

TEST(Chain, SingletonMatchesStepSeed) {
  const ImageBuffer img = synthesize_pristine(48, 48, 2);
  const std::vector<DistortionSpec> chain{{DistortionId::kWhiteNoise, 1, "noise-and-spatial"}};
  EXPECT_EQ(apply_chain(img, chain, 9),
            apply_distortion(img, chain[0], step_seed(9, 0, chain[0].id)));
}

TEST(Chain, NoiseThenJitterIsSequential) {
  const ImageBuffer img = synthesize_pristine(64, 64, 2);
  const DistortionSpec noise{DistortionId::kWhiteNoise, 1, "noise-and-spatial"};
  const DistortionSpec jit{DistortionId::kJitter, 1, "noise-and-spatial"};
  const std::vector<DistortionSpec> chain{noise, jit};
  const ImageBuffer first = apply_distortion(img, noise, step_seed(5, 0, noise.id));
  const ImageBuffer expected = apply_distortion(first, jit, step_seed(5, 1, jit.id));
  EXPECT_EQ(apply_chain(img, chain, 5), expected);
}

TEST(Chain, SecondStepDegradesFurther) {
  const auto& g = default_grouping();
  const auto pairs = g.cross_group_pairs();
  int worse = 0, total = 0;
  for (size_t i = 0; i < pairs.size(); i += 7) {
    const ImageBuffer img = synthesize_pristine(64, 64, 40 + i);
    const DistortionSpec a{pairs[i].first, 1, ""};
    const DistortionSpec b{pairs[i].second, 3, ""};
    const std::vector<DistortionSpec> one{a}, two{a, b};
    ++total;
    if (psnr(img, apply_chain(img, two, 3)) < psnr(img, apply_chain(img, one, 3))) ++worse;
  }
  EXPECT_EQ(worse, total);
}

}  // namespace
}  // namespace triqa
