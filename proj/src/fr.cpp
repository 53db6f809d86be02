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

#include "triqa/fr.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "triqa/errors.hpp"
#include "triqa/metrics.hpp"

namespace triqa {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw UsageError("cosine similarity of vectors with dimensions " +
                     std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw NumericalError("cosine similarity of a zero vector");
  // sqrt(uu * uu) == uu exactly, so identical inputs give exactly 1.
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

FRScore score_fr(const ImageBuffer& reference, const ImageBuffer& distorted,
                 const Checkpoint& ckpt, QualityScales scales, std::string reference_id,
                 std::string distorted_id) {
  const auto r = extract_quality_features(reference, ckpt, scales);
  const auto d = extract_quality_features(distorted, ckpt, scales);
  return {cosine_similarity(r.values, d.values), std::move(reference_id),
          std::move(distorted_id)};
}

FRDatasetResult evaluate_fr(const DatasetTable& table, const Checkpoint& ckpt,
                            const FROptions& options) {
  FRDatasetResult out;
  out.dataset = table.name;
  out.checkpoint_before = ckpt.fingerprint();
  const auto names = table.names();
  std::map<std::filesystem::path, FeatureVector> reference_features;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (!row.reference) {
      throw DataError(table.name + ": row '" + names[i] + "' has no reference image");
    }
    auto it = reference_features.find(*row.reference);
    if (it == reference_features.end()) {
      it = reference_features
               .emplace(*row.reference,
                        extract_quality_features(read_image(*row.reference), ckpt, options.scales))
               .first;
    }
    const auto dist = extract_quality_features(read_image(row.path), ckpt, options.scales);
    const std::string ref_name =
        table.root.empty() ? row.reference->generic_string()
                           : row.reference->lexically_relative(table.root).generic_string();
    out.scores.push_back({cosine_similarity(it->second.values, dist.values), ref_name, names[i]});
    out.mos.push_back(row.mos);
  }
  std::vector<double> values;
  for (const auto& s : out.scores) values.push_back(s.value);
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (values.size() < 2) {
    out.degenerate_reason = "fewer than two rows";
  } else if (constant(out.mos)) {
    out.degenerate_reason = "constant MOS";
  } else if (constant(values)) {
    out.degenerate_reason = "constant scores";
  } else {
    out.srcc = srcc(values, out.mos);
    out.plcc = plcc(values, out.mos);
    if (options.logistic_fit) out.plcc_logistic = plcc_logistic(values, out.mos);
  }
  out.checkpoint_after = ckpt.fingerprint();
  return out;
}

}  // namespace triqa
