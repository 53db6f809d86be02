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

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "triqa/errors.hpp"
#include "triqa/fingerprint.hpp"
#include "triqa/seeding.hpp"

namespace triqa {

using nlohmann::json;

namespace {

constexpr std::string_view kManifestFormat = "triqa-manifest";
constexpr int kManifestVersion = 1;

void validate_levels(const std::vector<int>& levels, const char* what) {
  if (levels.empty()) throw UsageError(std::string(what) + " must be non-empty");
  std::set<int> seen;
  for (const int level : levels) {
    validate_level(level);
    if (!seen.insert(level).second) {
      throw UsageError(std::string(what) + " contains a repeated level");
    }
  }
}

}  // namespace

std::string DegradationChain::rank_key() const {
  if (steps.empty()) return "pristine";
  std::string key;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i) key += '+';
    key += steps[i].label();
  }
  return key;
}

bool DegradationChain::precedes(const DegradationChain& other) const {
  if (steps.size() < other.steps.size()) {
    return std::equal(steps.begin(), steps.end(), other.steps.begin(),
                      [](const DistortionSpec& a, const DistortionSpec& b) {
                        return a.id == b.id && a.level == b.level;
                      });
  }
  if (steps.size() == 1 && other.steps.size() == 1) {
    return steps[0].id == other.steps[0].id && steps[0].level < other.steps[0].level;
  }
  return false;
}

DegradationChain parse_chain(const std::string& rank_key,
                             const DistortionGrouping& grouping) {
  DegradationChain chain;
  if (rank_key == "pristine") return chain;
  std::istringstream in(rank_key);
  std::string step;
  while (std::getline(in, step, '+')) {
    const auto at = step.find('@');
    if (at == std::string::npos) throw DataError("malformed chain step '" + step + "'");
    const auto id = parse_distortion(step.substr(0, at));
    if (!id) throw DataError("unregistered distortion in '" + step + "'");
    int level = 0;
    try {
      size_t used = 0;
      level = std::stoi(step.substr(at + 1), &used);
      if (used != step.size() - at - 1) throw std::invalid_argument(step);
    } catch (const std::exception&) {
      throw DataError("malformed level in '" + step + "'");
    }
    if (level < 1 || level > kNumLevels) throw DataError("level out of range in '" + step + "'");
    chain.steps.push_back({*id, level, grouping.group_of(*id)});
  }
  if (chain.steps.empty()) throw DataError("empty chain key");
  return chain;
}

std::string_view to_string(TripletKind kind) {
  return kind == TripletKind::kSingle ? "single" : "combined";
}

void validate_triplet(const TripletSpec& t, const DistortionGrouping& grouping) {
  auto fail = [&](const std::string& why) {
    throw DataError("invalid triplet [" + t.anchor.rank_key() + ", " +
                    t.positive.rank_key() + ", " + t.negative.rank_key() +
                    "] for image '" + t.image_id + "': " + why);
  };
  if (!t.anchor.precedes(t.positive) || !t.positive.precedes(t.negative)) {
    fail("members are not in increasing severity");
  }
  for (const auto* chain : {&t.anchor, &t.positive, &t.negative}) {
    if (chain->steps.size() > 2) fail("chains longer than two steps are unsupported");
    for (const auto& s : chain->steps) {
      if (!grouping.contains(s.id)) fail("distortion outside the grouping");
    }
  }
  if (t.kind == TripletKind::kSingle) {
    const DistortionSpec* first = nullptr;
    for (const auto* chain : {&t.anchor, &t.positive, &t.negative}) {
      if (chain->pristine()) continue;
      if (chain->steps.size() != 1) fail("single triplet with a multi-step chain");
      if (first && first->id != chain->steps[0].id) fail("single triplet mixes distortions");
      first = &chain->steps[0];
    }
  } else {
    if (!t.anchor.pristine()) fail("combined triplet anchor must be pristine");
    if (t.positive.steps.size() != 1 || t.negative.steps.size() != 2) {
      fail("combined triplet must be [pristine, A, A+B]");
    }
    if (grouping.group_of(t.negative.steps[0].id) ==
        grouping.group_of(t.negative.steps[1].id)) {
      fail("combined steps come from the same group");
    }
  }
}

std::vector<std::array<int, 3>> enumerate_single_triplets(int n_ranks) {
  if (n_ranks < 3) {
    throw UsageError("enumerate_single_triplets: need at least 3 ranks, got " +
                     std::to_string(n_ranks));
  }
  std::vector<std::array<int, 3>> triples;
  for (int a = 0; a < n_ranks; ++a)
    for (int p = a + 1; p < n_ranks; ++p)
      for (int n = p + 1; n < n_ranks; ++n) triples.push_back({a, p, n});
  return triples;
}

std::vector<TripletSpec> enumerate_combined_triplets(
    const DistortionGrouping& grouping, const std::vector<int>& positive_levels,
    const std::vector<int>& added_levels) {
  validate_levels(positive_levels, "positive_levels");
  validate_levels(added_levels, "added_levels");
  std::vector<TripletSpec> templates;
  for (const auto& [first, second] : grouping.cross_group_pairs()) {
    const std::string& g1 = grouping.group_of(first);
    const std::string& g2 = grouping.group_of(second);
    for (const int p : positive_levels) {
      for (const int q : added_levels) {
        TripletSpec t;
        t.kind = TripletKind::kCombined;
        t.positive.steps = {{first, p, g1}};
        t.negative.steps = {{first, p, g1}, {second, q, g2}};
        templates.push_back(std::move(t));
      }
    }
  }
  return templates;
}

TripletCounts Manifest::recount() const {
  TripletCounts counts;
  for (const auto& e : entries) {
    (e.kind == TripletKind::kSingle ? counts.single : counts.combined) += 1;
  }
  return counts;
}

uint64_t image_seed(uint64_t master_seed, const std::string& image_id) {
  return derive_seed(derive_seed(master_seed, streams::kForge), image_id);
}

Manifest build_manifest(const std::vector<std::string>& image_ids,
                        const DistortionGrouping& grouping, uint64_t master_seed,
                        const ManifestOptions& options) {
  if (image_ids.empty()) throw UsageError("build_manifest: no images");
  {
    std::unordered_set<std::string> seen;
    for (const auto& id : image_ids) {
      if (id.empty()) throw UsageError("build_manifest: empty image id");
      if (!seen.insert(id).second) {
        throw UsageError("build_manifest: duplicate image id '" + id + "'");
      }
    }
  }
  if (grouping.version().empty()) throw ConfigError("build_manifest: grouping has no version");
  const auto catalog = distortion_catalog(grouping);
  const auto ranks = enumerate_single_triplets(kNumLevels + 1);
  std::vector<TripletSpec> combined;
  if (options.include_combined) {
    combined = enumerate_combined_triplets(grouping, options.positive_levels,
                                           options.added_levels);
  }

  Manifest manifest;
  manifest.header.image_ids = image_ids;
  manifest.header.grouping_version = grouping.version();
  manifest.header.master_seed = master_seed;
  manifest.header.options = options;
  manifest.entries.reserve(image_ids.size() *
                           (ranks.size() * kNumDistortions + combined.size()));

  auto rank_chain = [](const DistortionSpec* ladder, int rank) {
    DegradationChain chain;
    if (rank > 0) chain.steps.push_back(ladder[rank - 1]);
    return chain;
  };

  for (const auto& image_id : image_ids) {
    const uint64_t seed = image_seed(master_seed, image_id);
    for (size_t d = 0; d < catalog.entries.size(); d += kNumLevels) {
      const DistortionSpec* ladder = &catalog.entries[d];
      for (const auto& [a, p, n] : ranks) {
        TripletSpec t;
        t.image_id = image_id;
        t.kind = TripletKind::kSingle;
        t.seed = seed;
        t.anchor = rank_chain(ladder, a);
        t.positive = rank_chain(ladder, p);
        t.negative = rank_chain(ladder, n);
        manifest.entries.push_back(std::move(t));
      }
    }
    for (const auto& tmpl : combined) {
      TripletSpec t = tmpl;
      t.image_id = image_id;
      t.seed = seed;
      manifest.entries.push_back(std::move(t));
    }
  }
  manifest.header.counts = manifest.recount();
  return manifest;
}

namespace {

json chain_to_json(const DegradationChain& chain) {
  json steps = json::array();
  for (const auto& s : chain.steps) steps.push_back(s.label());
  return steps;
}

DegradationChain chain_from_json(const json& j, const DistortionGrouping& grouping) {
  if (!j.is_array()) throw DataError("manifest chain must be an array");
  if (j.empty()) return {};
  std::string key;
  for (size_t i = 0; i < j.size(); ++i) {
    if (i) key += '+';
    key += j[i].get<std::string>();
  }
  return parse_chain(key, grouping);
}

json header_to_json(const ManifestHeader& h) {
  return json{
      {"format", kManifestFormat},
      {"format_version", kManifestVersion},
      {"images", h.image_ids},
      {"grouping_version", h.grouping_version},
      {"master_seed", h.master_seed},
      {"include_combined", h.options.include_combined},
      {"positive_levels", h.options.positive_levels},
      {"added_levels", h.options.added_levels},
      {"counts",
       {{"single", h.counts.single},
        {"combined", h.counts.combined},
        {"total", h.counts.total()}}},
  };
}

}  // namespace

void write_manifest(const Manifest& manifest, std::ostream& out) {
  out << header_to_json(manifest.header).dump() << '\n';
  for (const auto& e : manifest.entries) {
    const json line{
        {"image_id", e.image_id},
        {"kind", to_string(e.kind)},
        {"seed", e.seed},
        {"anchor", chain_to_json(e.anchor)},
        {"positive", chain_to_json(e.positive)},
        {"negative", chain_to_json(e.negative)},
    };
    out << line.dump() << '\n';
  }
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  write_manifest(manifest, out);
  if (!out) throw DataError("failed writing manifest " + path.string());
}

Manifest read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest is empty");
  Manifest manifest;
  try {
    const json h = json::parse(line);
    if (h.at("format").get<std::string>() != kManifestFormat) {
      throw DataError("not a triqa manifest");
    }
    if (h.at("format_version").get<int>() != kManifestVersion) {
      throw DataError("unsupported manifest format version");
    }
    auto& header = manifest.header;
    header.image_ids = h.at("images").get<std::vector<std::string>>();
    header.grouping_version = h.at("grouping_version").get<std::string>();
    header.master_seed = h.at("master_seed").get<uint64_t>();
    header.options.include_combined = h.at("include_combined").get<bool>();
    header.options.positive_levels = h.at("positive_levels").get<std::vector<int>>();
    header.options.added_levels = h.at("added_levels").get<std::vector<int>>();
    header.counts.single = h.at("counts").at("single").get<uint64_t>();
    header.counts.combined = h.at("counts").at("combined").get<uint64_t>();
    if (h.at("counts").at("total").get<uint64_t>() != header.counts.total()) {
      throw DataError("manifest header total disagrees with its breakdown");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest header: ") + e.what());
  }

  const DistortionGrouping& grouping =
      grouping_for_version(manifest.header.grouping_version);
  const std::set<std::string> images(manifest.header.image_ids.begin(),
                                     manifest.header.image_ids.end());
  std::unordered_set<std::string> seen;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TripletSpec t;
    try {
      const json j = json::parse(line);
      t.image_id = j.at("image_id").get<std::string>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "single") {
        t.kind = TripletKind::kSingle;
      } else if (kind == "combined") {
        t.kind = TripletKind::kCombined;
      } else {
        throw DataError("unknown triplet kind '" + kind + "'");
      }
      t.seed = j.at("seed").get<uint64_t>();
      t.anchor = chain_from_json(j.at("anchor"), grouping);
      t.positive = chain_from_json(j.at("positive"), grouping);
      t.negative = chain_from_json(j.at("negative"), grouping);
    } catch (const json::exception& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!images.contains(t.image_id)) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": image '" + t.image_id + "' not in header");
    }
    validate_triplet(t, grouping);
    if (!seen.insert(t.image_id + '|' + t.anchor.rank_key() + '|' +
                     t.positive.rank_key() + '|' + t.negative.rank_key())
             .second) {
      throw DataError("manifest line " + std::to_string(line_no) + ": duplicate triplet");
    }
    manifest.entries.push_back(std::move(t));
  }
  if (manifest.recount() != manifest.header.counts) {
    throw DataError("manifest counts summary does not match its entries");
  }
  return manifest;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + path.string());
  return read_manifest(in);
}

std::string manifest_fingerprint(const Manifest& manifest) {
  std::ostringstream out;
  write_manifest(manifest, out);
  return sha256_hex(out.str());
}

std::array<ImageBuffer, 3> render_triplet(const TripletSpec& spec,
                                          const ImageBuffer& pristine) {
  require_min_size(pristine, kMinRenderSide, "render_triplet");
  return {apply_chain(pristine, spec.anchor.steps, spec.seed),
          apply_chain(pristine, spec.positive.steps, spec.seed),
          apply_chain(pristine, spec.negative.steps, spec.seed)};
}

void ChainRenderer::add_image(const std::string& image_id, ImageBuffer pristine) {
  require_min_size(pristine, kMinRenderSide, "ChainRenderer");
  auto& entry = images_[image_id];
  entry.pristine = std::move(pristine);
  entry.first_steps.clear();
  entry.seeded = false;
}

bool ChainRenderer::has_image(const std::string& image_id) const {
  return images_.contains(image_id);
}

const ImageBuffer& ChainRenderer::pristine(const std::string& image_id) const {
  const auto it = images_.find(image_id);
  if (it == images_.end()) throw DataError("no pristine image '" + image_id + "'");
  return it->second.pristine;
}

ImageBuffer ChainRenderer::render(const std::string& image_id,
                                  const DegradationChain& chain, uint64_t seed) {
  const auto it = images_.find(image_id);
  if (it == images_.end()) throw DataError("no pristine image '" + image_id + "'");
  Entry& entry = it->second;
  if (chain.pristine()) return entry.pristine;
  if (!entry.seeded || entry.seed != seed) {
    entry.first_steps.clear();
    entry.seed = seed;
    entry.seeded = true;
  }
  const auto& head = chain.steps.front();
  const auto key = std::make_pair(head.id, head.level);
  auto cached = entry.first_steps.find(key);
  if (cached == entry.first_steps.end()) {
    cached = entry.first_steps
                 .emplace(key, apply_distortion(entry.pristine, head,
                                                step_seed(seed, 0, head.id)))
                 .first;
  }
  ImageBuffer current = cached->second;
  for (size_t i = 1; i < chain.steps.size(); ++i) {
    current = apply_distortion(current, chain.steps[i],
                               step_seed(seed, i, chain.steps[i].id));
  }
  return current;
}

std::array<ImageBuffer, 3> ChainRenderer::render(const TripletSpec& spec) {
  return {render(spec.image_id, spec.anchor, spec.seed),
          render(spec.image_id, spec.positive, spec.seed),
          render(spec.image_id, spec.negative, spec.seed)};
}

}  // namespace triqa
