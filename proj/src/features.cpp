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

#include "triqa/features.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "triqa/errors.hpp"
#include "triqa/fingerprint.hpp"

namespace triqa {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kContent:
      return "content";
    case Provenance::kQualityFull:
      return "quality-full";
    case Provenance::kQualityHalf:
      return "quality-half";
    case Provenance::kQuality:
      return "quality";
    case Provenance::kFused:
      return "fused";
  }
  return "unknown";
}

Provenance parse_provenance(std::string_view name) {
  for (const auto p : {Provenance::kContent, Provenance::kQualityFull,
                       Provenance::kQualityHalf, Provenance::kQuality, Provenance::kFused}) {
    if (to_string(p) == name) return p;
  }
  throw DataError("unknown feature provenance '" + std::string(name) + "'");
}

ImageBuffer downsample_half(const ImageBuffer& img) {
  const int oh = img.height() / 2, ow = img.width() / 2;
  if (oh == 0 || ow == 0) throw DataError("image too small to downsample");
  static constexpr float kTaps[4] = {0.125f, 0.375f, 0.375f, 0.125f};
  auto reflect = [](int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - i - 1;
    return i;
  };
  // Horizontal pass into float, then vertical pass with a single rounding.
  std::vector<float> rows(static_cast<size_t>(img.height()) * ow * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < 3; ++c) {
        float acc = 0.0f;
        for (int t = 0; t < 4; ++t) {
          acc += kTaps[t] * static_cast<float>(img.at(y, reflect(2 * x - 1 + t, img.width()), c));
        }
        rows[(static_cast<size_t>(y) * ow + x) * 3 + c] = acc;
      }
    }
  }
  ImageBuffer out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < 3; ++c) {
        float acc = 0.0f;
        for (int t = 0; t < 4; ++t) {
          const int sy = reflect(2 * y - 1 + t, img.height());
          acc += kTaps[t] * rows[(static_cast<size_t>(sy) * ow + x) * 3 + c];
        }
        out.at(y, x, c) = static_cast<uint8_t>(std::lround(std::clamp(acc, 0.0f, 255.0f)));
      }
    }
  }
  return out;
}

ContentEncoder::ContentEncoder(Preset preset, uint64_t seed)
    : preset_(preset), seed_(seed), network_(content_backbone(preset), seed) {}

ContentEncoder ContentEncoder::from_weights(Preset preset, const std::filesystem::path& path) {
  ContentEncoder encoder(preset, 0);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open content weights " + path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  encoder.network_.load_parameter_bytes(bytes.str());
  return encoder;
}

std::string ContentEncoder::fingerprint() const {
  return sha256_hex(network_.parameter_bytes());
}

std::vector<float> ContentEncoder::pooled(const ImageBuffer& img) const {
  return network_.features(nn::to_input(img));
}

FeatureVector extract_content_features(const ImageBuffer& img, const ContentEncoder& encoder) {
  const auto pooled = encoder.pooled(img);
  return {{pooled.begin(), pooled.end()}, Provenance::kContent};
}

QualityScales parse_scales(std::string_view text) {
  if (text == "full") return QualityScales::kFull;
  if (text == "half") return QualityScales::kHalf;
  if (text == "full,half" || text == "both") return QualityScales::kBoth;
  throw UsageError("unknown scale selection '" + std::string(text) +
                   "' (expected full, half or full,half)");
}

std::string_view to_string(QualityScales scales) {
  switch (scales) {
    case QualityScales::kFull:
      return "full";
    case QualityScales::kHalf:
      return "half";
    case QualityScales::kBoth:
      return "full,half";
  }
  return "full,half";
}

int quality_feature_dim(const Checkpoint& ckpt, QualityScales scales) {
  const int per_scale = ckpt.network.spec().feature_dim();
  return scales == QualityScales::kBoth ? 2 * per_scale : per_scale;
}

FeatureVector extract_quality_features(const ImageBuffer& img, const Checkpoint& ckpt,
                                       QualityScales scales) {
  const int min_side = ckpt.network.spec().total_stride();
  FeatureVector out;
  if (scales != QualityScales::kHalf) {
    const auto full = ckpt.network.features(nn::to_input(img));
    out.values.insert(out.values.end(), full.begin(), full.end());
  }
  if (scales != QualityScales::kFull) {
    if (img.height() / 2 < min_side || img.width() / 2 < min_side) {
      throw DataError("image " + std::to_string(img.height()) + "x" +
                      std::to_string(img.width()) + " is below the backbone minimum of " +
                      std::to_string(min_side) + " at half scale");
    }
    const auto half = ckpt.network.features(nn::to_input(downsample_half(img)));
    out.values.insert(out.values.end(), half.begin(), half.end());
  }
  out.provenance = scales == QualityScales::kFull   ? Provenance::kQualityFull
                   : scales == QualityScales::kHalf ? Provenance::kQualityHalf
                                                    : Provenance::kQuality;
  return out;
}

FeatureVector fuse(const FeatureVector& content, const FeatureVector& quality) {
  if (content.provenance != Provenance::kContent) {
    throw UsageError("fuse: first argument must be content features, got " +
                     std::string(to_string(content.provenance)));
  }
  if (quality.provenance != Provenance::kQuality &&
      quality.provenance != Provenance::kQualityFull &&
      quality.provenance != Provenance::kQualityHalf) {
    throw UsageError("fuse: second argument must be quality features, got " +
                     std::string(to_string(quality.provenance)));
  }
  FeatureVector fused;
  fused.provenance = Provenance::kFused;
  fused.values.reserve(content.dim() + quality.dim());
  fused.values.insert(fused.values.end(), content.values.begin(), content.values.end());
  fused.values.insert(fused.values.end(), quality.values.begin(), quality.values.end());
  return fused;
}

namespace {

json sidecar(const FeatureMatrix& m) {
  return json{{"format", "triqa-features"},
              {"dtype", "float64-le"},
              {"layout", "row-major"},
              {"rows", m.values.rows()},
              {"cols", m.values.cols()},
              {"provenance", "fused"},
              {"content_dim", m.content_dim},
              {"quality_dim", m.quality_dim},
              {"quality_scales", to_string(m.scales)},
              {"checkpoint_fingerprint", m.checkpoint_fingerprint},
              {"content_fingerprint", m.content_fingerprint},
              {"content_preset", to_string(m.content_preset)},
              {"content_seed", m.content_seed},
              {"seed", m.seed},
              {"images", m.images}};
}

std::string value_bytes(const Eigen::MatrixXd& values) {
  static_assert(std::endian::native == std::endian::little);
  std::string bytes;
  bytes.reserve(static_cast<size_t>(values.size()) * sizeof(double));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      bytes.append(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  return bytes;
}

}  // namespace

FeatureSource FeatureMatrix::source() const {
  return {content_dim,          quality_dim,    scales,      checkpoint_fingerprint,
          content_fingerprint, content_preset, content_seed};
}

std::string FeatureMatrix::fingerprint() const {
  return sha256_hex(sidecar(*this).dump() + value_bytes(values));
}

FeatureMatrix extract_feature_matrix(const std::vector<std::filesystem::path>& images,
                                     const std::vector<std::string>& names,
                                     const Checkpoint& ckpt, const ContentEncoder& content,
                                     QualityScales scales) {
  if (images.size() != names.size()) throw UsageError("image/name count mismatch");
  FeatureMatrix m;
  m.images = names;
  m.content_dim = content.dim();
  m.quality_dim = quality_feature_dim(ckpt, scales);
  m.scales = scales;
  m.checkpoint_fingerprint = ckpt.fingerprint();
  m.content_fingerprint = content.fingerprint();
  m.content_preset = content.preset();
  m.content_seed = content.seed();
  m.values.resize(static_cast<Eigen::Index>(images.size()), m.content_dim + m.quality_dim);
  for (size_t i = 0; i < images.size(); ++i) {
    const ImageBuffer img = read_image(images[i]);
    const auto fused = fuse(extract_content_features(img, content),
                            extract_quality_features(img, ckpt, scales));
    for (size_t j = 0; j < fused.dim(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fused.values[j];
    }
  }
  return m;
}

void write_features(const FeatureMatrix& m, const std::filesystem::path& path) {
  const std::string bytes = value_bytes(m.values);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write features " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing features " + path.string());
  }
  json meta = sidecar(m);
  meta["sha256"] = sha256_hex(bytes);
  std::ofstream side(path.string() + ".json");
  if (!side) throw DataError("cannot write " + path.string() + ".json");
  side << meta.dump(2) << '\n';
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw DataError("missing feature sidecar " + path.string() + ".json");
  FeatureMatrix m;
  std::string digest;
  Eigen::Index rows = 0, cols = 0;
  try {
    const json meta = json::parse(side);
    if (meta.at("format").get<std::string>() != "triqa-features") {
      throw DataError(path.string() + " is not a triqa feature file");
    }
    rows = meta.at("rows").get<Eigen::Index>();
    cols = meta.at("cols").get<Eigen::Index>();
    m.content_dim = meta.at("content_dim").get<int>();
    m.quality_dim = meta.at("quality_dim").get<int>();
    m.scales = parse_scales(meta.at("quality_scales").get<std::string>());
    m.checkpoint_fingerprint = meta.at("checkpoint_fingerprint").get<std::string>();
    m.content_fingerprint = meta.at("content_fingerprint").get<std::string>();
    m.content_preset = parse_preset(meta.at("content_preset").get<std::string>());
    m.content_seed = meta.at("content_seed").get<uint64_t>();
    m.seed = meta.at("seed").get<uint64_t>();
    m.images = meta.at("images").get<std::vector<std::string>>();
    digest = meta.at("sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError("malformed feature sidecar: " + std::string(e.what()));
  }
  if (cols != m.content_dim + m.quality_dim) {
    throw DataError("feature sidecar dims do not add up");
  }
  if (static_cast<Eigen::Index>(m.images.size()) != rows) {
    throw DataError("feature sidecar image list does not match the row count");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open features " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  if (bytes.size() != static_cast<size_t>(rows * cols) * sizeof(double)) {
    throw DataError("feature file size does not match its sidecar");
  }
  if (sha256_hex(bytes) != digest) throw DataError("feature file digest mismatch");
  m.values.resize(rows, cols);
  size_t offset = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v;
      std::memcpy(&v, bytes.data() + offset, sizeof(v));
      offset += sizeof(v);
      m.values(r, c) = v;
    }
  }
  return m;
}

}  // namespace triqa
