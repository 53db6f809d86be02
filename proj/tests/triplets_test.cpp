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


#include "triqa/triplets.hpp"

#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "triqa/errors.hpp"

namespace triqa {
namespace {

// Increasing triples by brute force over the full cube, in lexicographic order.
std::vector<std::array<int, 3>> brute_triples(int n) {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i < n * n * n; ++i) {
    const int a = i / (n * n), b = (i / n) % n, c = i % n;
    if (a < b && b < c) out.push_back({a, b, c});
  }
  return out;
}

int64_t choose3(int64_t n) { return n * (n - 1) * (n - 2) / 6; }

TEST(SingleTriplets, MatchBruteForce) {
  for (int n = 3; n <= 9; ++n) {
    const auto t = enumerate_single_triplets(n);
    EXPECT_EQ(t, brute_triples(n)) << n;
    EXPECT_EQ(static_cast<int64_t>(t.size()), choose3(n));
  }
}

TEST(SingleTriplets, KnownCounts) {
  EXPECT_EQ(enumerate_single_triplets(6).size(), 20u);
  EXPECT_EQ(enumerate_single_triplets(5).size(), 10u);
  const auto three = enumerate_single_triplets(3);
  ASSERT_EQ(three.size(), 1u);
  EXPECT_EQ(three[0], (std::array<int, 3>{0, 1, 2}));
  // Ten of the twenty start from the pristine rank.
  int pristine_first = 0;
  for (const auto& t : enumerate_single_triplets(6)) pristine_first += t[0] == 0;
  EXPECT_EQ(pristine_first, 10);
}

TEST(SingleTriplets, TooFewRanks) {
  EXPECT_THROW(enumerate_single_triplets(2), UsageError);
  EXPECT_THROW(enumerate_single_triplets(-1), UsageError);
}

TEST(CombinedTriplets, DefaultGroupingGives608) {
  const auto t = enumerate_combined_triplets(default_grouping(), {1, 3}, {1, 3});
  EXPECT_EQ(t.size(), 608u);
  std::set<std::string> keys;
  for (const auto& e : t) {
    EXPECT_NO_THROW(validate_triplet(e, default_grouping()));
    keys.insert(e.negative.rank_key());
  }
  EXPECT_EQ(keys.size(), 608u);
}

TEST(CombinedTriplets, NoiseAndJitterExample) {
  const auto g = testing::two_group_grouping();
  const auto t = enumerate_combined_triplets(g, {1, 3}, {1, 3});
  std::vector<std::array<std::string, 3>> got;
  for (const auto& e : t) {
    got.push_back({e.anchor.rank_key(), e.positive.rank_key(), e.negative.rank_key()});
  }
  // "noise" sorts before "spatial", so white noise is applied first.
  const std::vector<std::array<std::string, 3>> expected{
      {"pristine", "white-noise@1", "white-noise@1+jitter@1"},
      {"pristine", "white-noise@1", "white-noise@1+jitter@3"},
      {"pristine", "white-noise@3", "white-noise@3+jitter@1"},
      {"pristine", "white-noise@3", "white-noise@3+jitter@3"},
  };
  EXPECT_EQ(got, expected);

  // Renaming the groups flips the application order.
  const auto g2 = DistortionGrouping::partial(
      "test-jitter-first", {{"a-spatial", {DistortionId::kJitter}}, {"b-noise", {DistortionId::kWhiteNoise}}});
  const auto t2 = enumerate_combined_triplets(g2, {1, 3}, {1, 3});
  ASSERT_EQ(t2.size(), 4u);
  EXPECT_EQ(t2[0].positive.rank_key(), "jitter@1");
  EXPECT_EQ(t2[0].negative.rank_key(), "jitter@1+white-noise@1");
  EXPECT_EQ(t2[3].negative.rank_key(), "jitter@3+white-noise@3");
}

TEST(CombinedTriplets, OneGroupIsEmpty) {
  const auto g = DistortionGrouping::partial(
      "one", {{"noise", {DistortionId::kWhiteNoise, DistortionId::kJitter}}});
  EXPECT_TRUE(enumerate_combined_triplets(g, {1, 3}, {1, 3}).empty());
}

TEST(CombinedTriplets, LevelSetValidation) {
  const auto g = testing::two_group_grouping();
  EXPECT_THROW(enumerate_combined_triplets(g, {}, {1}), UsageError);
  EXPECT_THROW(enumerate_combined_triplets(g, {1, 1}, {1}), UsageError);
  EXPECT_THROW(enumerate_combined_triplets(g, {0}, {1}), UsageError);
  EXPECT_THROW(enumerate_combined_triplets(g, {1}, {6}), UsageError);
  EXPECT_EQ(enumerate_combined_triplets(g, {1, 2, 5}, {4}).size(), 3u);
}

TEST(Manifest, CountsPerImage) {
  const auto one = build_manifest({"a"}, default_grouping(), 1, {.include_combined = false});
  EXPECT_EQ(one.entries.size(), 400u);
  EXPECT_EQ(one.header.counts, (TripletCounts{400, 0}));
  const auto three = build_manifest({"a", "b", "c"}, default_grouping(), 1);
  EXPECT_EQ(three.header.counts, (TripletCounts{1200, 1824}));
  EXPECT_EQ(three.recount(), three.header.counts);
}

TEST(Manifest, CorpusTotalsScaleLinearly) {
  // Per-image counts times the corpus sizes used for training and validation.
  const auto one = build_manifest({"a"}, default_grouping(), 1);
  const auto per_image = one.header.counts;
  EXPECT_EQ(per_image, (TripletCounts{400, 608}));
  EXPECT_EQ(800 * per_image.single, 320000u);
  EXPECT_EQ(800 * per_image.combined, 486400u);
  EXPECT_EQ(800 * per_image.total(), 806400u);
  EXPECT_EQ(100 * per_image.total(), 100800u);

  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("img" + std::to_string(i));
  const auto hundred = build_manifest(ids, default_grouping(), 1);
  EXPECT_EQ(hundred.header.counts, (TripletCounts{40000, 60800}));
}

TEST(Manifest, EveryEntryIsOrderedAndUnique) {
  const auto m = build_manifest({"a", "b"}, default_grouping(), 3);
  std::set<std::string> keys;
  for (const auto& e : m.entries) {
    ASSERT_NO_THROW(validate_triplet(e, default_grouping()));
    EXPECT_TRUE(e.anchor.precedes(e.positive));
    EXPECT_TRUE(e.positive.precedes(e.negative));
    keys.insert(e.image_id + "|" + e.anchor.rank_key() + "|" + e.positive.rank_key() + "|" +
                e.negative.rank_key());
    for (const auto* c : {&e.anchor, &e.positive, &e.negative})
      for (const auto& s : c->steps) EXPECT_TRUE(default_grouping().contains(s.id));
  }
  EXPECT_EQ(keys.size(), m.entries.size());
}

TEST(Manifest, InputValidation) {
  EXPECT_THROW(build_manifest({}, default_grouping(), 1), UsageError);
  EXPECT_THROW(build_manifest({"a", "a"}, default_grouping(), 1), UsageError);
  EXPECT_THROW(build_manifest({""}, default_grouping(), 1), UsageError);
}

TEST(Manifest, ByteIdenticalRebuild) {
  std::ostringstream a, b;
  write_manifest(build_manifest({"x", "y"}, default_grouping(), 9), a);
  write_manifest(build_manifest({"x", "y"}, default_grouping(), 9), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(manifest_fingerprint(build_manifest({"x"}, default_grouping(), 9)),
            manifest_fingerprint(build_manifest({"x"}, default_grouping(), 9)));
  EXPECT_NE(manifest_fingerprint(build_manifest({"x"}, default_grouping(), 9)),
            manifest_fingerprint(build_manifest({"x"}, default_grouping(), 10)));
}

TEST(Manifest, JsonLinesRoundTrip) {
  testing::TempDir dir("manifest");
  const auto m = build_manifest({"x", "y"}, default_grouping(), 21);
  write_manifest(m, dir / "m.jsonl");
  const auto back = read_manifest(dir / "m.jsonl");
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(back.header.counts, m.header.counts);
  EXPECT_EQ(back.header.image_ids, m.header.image_ids);
  EXPECT_EQ(back.header.master_seed, 21u);
  EXPECT_EQ(manifest_fingerprint(back), manifest_fingerprint(m));

  const std::string text = testing::slurp(dir / "m.jsonl");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  EXPECT_EQ(header["counts"]["total"].get<uint64_t>(), m.entries.size());
  EXPECT_EQ(header["grouping_version"], default_grouping().version());
}

TEST(Manifest, TamperedCountsRejected) {
  const auto m = build_manifest({"x"}, default_grouping(), 21, {.include_combined = false});
  std::ostringstream out;
  write_manifest(m, out);
  std::string text = out.str();
  // Drop the last entry.
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  std::istringstream in(text);
  EXPECT_THROW(read_manifest(in), DataError);
  std::istringstream junk("{\"format\":\"other\"}\n");
  EXPECT_THROW(read_manifest(junk), DataError);
  std::istringstream empty("");
  EXPECT_THROW(read_manifest(empty), DataError);
}

TEST(Chains, PrecedesRelation) {
  const auto& g = default_grouping();
  const auto p = parse_chain("pristine", g);
  const auto n1 = parse_chain("white-noise@1", g);
  const auto n3 = parse_chain("white-noise@3", g);
  const auto nb = parse_chain("white-noise@1+gaussian-blur@1", g);
  const auto j3 = parse_chain("jitter@3", g);
  EXPECT_TRUE(p.precedes(n1));
  EXPECT_TRUE(n1.precedes(n3));
  EXPECT_FALSE(n3.precedes(n1));
  EXPECT_FALSE(n1.precedes(n1));
  EXPECT_TRUE(n1.precedes(nb));
  EXPECT_FALSE(n3.precedes(nb));
  EXPECT_FALSE(n1.precedes(j3));
  EXPECT_FALSE(p.precedes(p));
}

TEST(Chains, ParseErrors) {
  const auto& g = default_grouping();
  EXPECT_THROW(parse_chain("white-noise", g), DataError);
  EXPECT_THROW(parse_chain("sparkle@1", g), DataError);
  EXPECT_THROW(parse_chain("white-noise@9", g), DataError);
  EXPECT_THROW(parse_chain("white-noise@1x", g), DataError);
  EXPECT_EQ(parse_chain("jpeg@2+jitter@4", g).rank_key(), "jpeg@2+jitter@4");
}

TEST(Validate, RejectsBadTriplets) {
  const auto& g = default_grouping();
  TripletSpec t;
  t.anchor = parse_chain("pristine", g);
  t.positive = parse_chain("white-noise@3", g);
  t.negative = parse_chain("white-noise@1", g);
  EXPECT_THROW(validate_triplet(t, g), DataError);
  t.negative = parse_chain("white-noise@3+white-noise-color@1", g);
  t.kind = TripletKind::kCombined;
  EXPECT_THROW(validate_triplet(t, g), DataError);  // same group
  t.negative = parse_chain("white-noise@3+jpeg@1", g);
  EXPECT_NO_THROW(validate_triplet(t, g));
  t.kind = TripletKind::kSingle;
  EXPECT_THROW(validate_triplet(t, g), DataError);
}

TEST(Render, AnchorPristineAndPrefixSharing) {
  const ImageBuffer img = synthesize_pristine(256, 256, 77);
  const auto m = build_manifest({"x"}, default_grouping(), 5);
  const TripletSpec* combined = nullptr;
  for (const auto& e : m.entries)
    if (e.kind == TripletKind::kCombined) {
      combined = &e;
      break;
    }
  ASSERT_NE(combined, nullptr);
  const auto out = render_triplet(*combined, img);
  EXPECT_EQ(out[0], img);
  // Positive equals the negative chain's first step.
  const auto& s0 = combined->negative.steps[0];
  EXPECT_EQ(out[1], apply_distortion(img, s0, step_seed(combined->seed, 0, s0.id)));
  EXPECT_EQ(out[2], apply_distortion(out[1], combined->negative.steps[1],
                                     step_seed(combined->seed, 1, combined->negative.steps[1].id)));
}

TEST(Render, CachedRendererMatchesDirect) {
  ChainRenderer renderer;
  renderer.add_image("x", synthesize_pristine(256, 256, 78));
  const auto m = build_manifest({"x"}, default_grouping(), 6);
  for (size_t i = 0; i < m.entries.size(); i += 37) {
    EXPECT_EQ(renderer.render(m.entries[i]), render_triplet(m.entries[i], renderer.pristine("x")));
  }
  EXPECT_THROW(renderer.render("missing", {}, 1), DataError);
}

TEST(Render, SmallPristineRejected) {
  const auto m = build_manifest({"x"}, default_grouping(), 6, {.include_combined = false});
  EXPECT_THROW(render_triplet(m.entries[0], synthesize_pristine(255, 300, 1)), DataError);
}

// PSNR to pristine falls along every sampled single triplet.
TEST(Render, SingleTripletsOrderedByPsnr) {
  const ImageBuffer img = synthesize_pristine(256, 256, 79);
  const auto m = build_manifest({"x"}, default_grouping(), 8, {.include_combined = false});
  for (size_t i = 0; i < m.entries.size(); i += 9) {
    const auto out = render_triplet(m.entries[i], img);
    const double qa = psnr(img, out[0]), qp = psnr(img, out[1]), qn = psnr(img, out[2]);
    EXPECT_GE(qa + 0.5, qp) << m.entries[i].positive.rank_key();
    EXPECT_GE(qp + 0.5, qn) << m.entries[i].negative.rank_key();
  }
}

}  // namespace
}  // namespace triqa
