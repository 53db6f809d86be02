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
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "triqa/errors.hpp"
#include "triqa/seeding.hpp"

namespace triqa {

namespace {

struct Registration {
  DistortionId id;
  std::string_view name;
  // Severity parameter per level 1..5, strictly increasing severity.
  std::array<double, kNumLevels> ladder;
};

// Ladders follow the KADID-10k families; values were chosen so that PSNR to
// the pristine image drops at every step (see distortion_test.cpp).
constexpr std::array<Registration, kNumDistortions> kRegistry = {{
    {DistortionId::kGaussianBlur, "gaussian-blur", {0.6, 1.0, 1.6, 2.6, 4.2}},
    {DistortionId::kLensBlur, "lens-blur", {1, 2, 3, 5, 8}},
    {DistortionId::kMotionBlur, "motion-blur", {3, 5, 9, 15, 23}},
    {DistortionId::kColorDiffuse, "color-diffuse", {1, 3, 6, 8, 12}},
    {DistortionId::kColorShift, "color-shift", {1, 2, 4, 6, 9}},
    {DistortionId::kColorQuantization, "color-quantization", {48, 32, 20, 12, 6}},
    {DistortionId::kColorSaturate1, "color-saturate-1", {0.7, 0.5, 0.3, 0.15, 0.0}},
    {DistortionId::kColorSaturate2, "color-saturate-2", {1.4, 1.8, 2.4, 3.2, 4.2}},
    {DistortionId::kJpeg, "jpeg", {43, 36, 24, 7, 4}},
    {DistortionId::kJpeg2000, "jpeg2000", {60, 30, 15, 8, 4}},
    {DistortionId::kBrighten, "brighten", {1.3, 1.6, 2.0, 2.6, 3.4}},
    {DistortionId::kDarken, "darken", {1.3, 1.6, 2.0, 2.6, 3.4}},
    {DistortionId::kMeanShift, "mean-shift", {0.04, 0.08, 0.12, 0.17, 0.23}},
    {DistortionId::kWhiteNoise, "white-noise", {0.03, 0.05, 0.08, 0.12, 0.18}},
    {DistortionId::kWhiteNoiseColor, "white-noise-color", {0.04, 0.07, 0.11, 0.16, 0.24}},
    {DistortionId::kImpulseNoise, "impulse-noise", {0.005, 0.01, 0.03, 0.06, 0.1}},
    {DistortionId::kMultiplicativeNoise, "multiplicative-noise", {0.06, 0.12, 0.2, 0.3, 0.45}},
    {DistortionId::kDenoiseOversmooth, "denoise-oversmooth", {0.03, 0.05, 0.08, 0.12, 0.18}},
    {DistortionId::kJitter, "jitter", {0.5, 1.0, 2.0, 3.0, 4.5}},
    {DistortionId::kPixelate, "pixelate", {2, 3, 4, 6, 9}},
}};

constexpr std::array<DistortionId, kNumDistortions> kAllIds = [] {
  std::array<DistortionId, kNumDistortions> ids{};
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = kRegistry[i].id;
  return ids;
}();

const Registration& registration(DistortionId id) {
  const auto index = static_cast<size_t>(id);
  if (index >= kRegistry.size()) throw UsageError("unsupported distortion id");
  return kRegistry[index];
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

constexpr std::string_view kDefaultGroupingText = R"(version = kadid20-5g-v1
[groups]
blur = gaussian-blur, lens-blur, motion-blur
brightness = brighten, darken, mean-shift
color = color-diffuse, color-shift, color-quantization, color-saturate-1, color-saturate-2
compression = jpeg, jpeg2000
noise-and-spatial = white-noise, white-noise-color, impulse-noise, multiplicative-noise, denoise-oversmooth, jitter, pixelate
)";

}  // namespace

std::span<const DistortionId> all_distortions() { return kAllIds; }

std::string_view to_string(DistortionId id) { return registration(id).name; }

std::optional<DistortionId> parse_distortion(std::string_view name) {
  for (const auto& r : kRegistry) {
    if (r.name == name) return r.id;
  }
  return std::nullopt;
}

DistortionGrouping DistortionGrouping::partial(
    std::string version,
    std::map<std::string, std::vector<DistortionId>> groups) {
  std::set<DistortionId> seen;
  for (const auto& [name, members] : groups) {
    if (name.empty()) throw ConfigError("grouping: empty group name");
    if (members.empty()) throw ConfigError("grouping: group '" + name + "' is empty");
    for (const auto id : members) {
      registration(id);
      if (!seen.insert(id).second) {
        throw ConfigError("grouping: distortion '" + std::string(to_string(id)) +
                          "' appears in more than one group");
      }
    }
  }
  DistortionGrouping g;
  g.version_ = std::move(version);
  g.groups_ = std::move(groups);
  return g;
}

DistortionGrouping::DistortionGrouping(
    std::string version, std::map<std::string, std::vector<DistortionId>> groups)
    : DistortionGrouping(partial(std::move(version), std::move(groups))) {
  if (version_.empty()) throw ConfigError("grouping: missing version tag");
  for (const auto id : kAllIds) {
    if (!contains(id)) {
      throw ConfigError("grouping: distortion '" + std::string(to_string(id)) +
                        "' is not assigned to any group");
    }
  }
}

bool DistortionGrouping::contains(DistortionId id) const {
  for (const auto& [name, members] : groups_) {
    if (std::find(members.begin(), members.end(), id) != members.end()) return true;
  }
  return false;
}

const std::string& DistortionGrouping::group_of(DistortionId id) const {
  for (const auto& [name, members] : groups_) {
    if (std::find(members.begin(), members.end(), id) != members.end()) return name;
  }
  throw ConfigError("grouping '" + version_ + "' has no group for '" +
                    std::string(to_string(id)) + "'");
}

std::vector<std::pair<DistortionId, DistortionId>>
DistortionGrouping::cross_group_pairs() const {
  std::vector<std::pair<DistortionId, DistortionId>> pairs;
  for (auto first = groups_.begin(); first != groups_.end(); ++first) {
    for (auto second = std::next(first); second != groups_.end(); ++second) {
      for (const auto a : first->second) {
        for (const auto b : second->second) pairs.emplace_back(a, b);
      }
    }
  }
  return pairs;
}

std::string DistortionGrouping::to_text() const {
  std::ostringstream out;
  out << "version = " << version_ << "\n[groups]\n";
  for (const auto& [name, members] : groups_) {
    out << name << " =";
    for (size_t i = 0; i < members.size(); ++i) {
      out << (i == 0 ? " " : ", ") << to_string(members[i]);
    }
    out << "\n";
  }
  return out.str();
}

DistortionGrouping parse_grouping(std::string_view text) {
  std::string version;
  std::map<std::string, std::vector<DistortionId>> groups;
  bool in_groups = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto where = "grouping line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line != "[groups]") throw ConfigError(where + "unknown section " + line);
      in_groups = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!in_groups) {
      if (key != "version") throw ConfigError(where + "unknown key '" + key + "'");
      version = value;
      continue;
    }
    if (groups.contains(key)) throw ConfigError(where + "duplicate group '" + key + "'");
    auto& members = groups[key];
    std::istringstream items(value);
    std::string item;
    while (std::getline(items, item, ',')) {
      const std::string name = trim(item);
      const auto id = parse_distortion(name);
      if (!id) {
        throw ConfigError(where + "unregistered distortion '" + name + "'");
      }
      members.push_back(*id);
    }
  }
  return DistortionGrouping(std::move(version), std::move(groups));
}

DistortionGrouping load_grouping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grouping file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_grouping(buffer.str());
}

const DistortionGrouping& default_grouping() {
  static const DistortionGrouping grouping = parse_grouping(kDefaultGroupingText);
  return grouping;
}

const DistortionGrouping& grouping_for_version(std::string_view version) {
  if (version == default_grouping().version()) return default_grouping();
  throw ConfigError("unknown grouping version '" + std::string(version) + "'");
}

std::string DistortionSpec::label() const {
  return std::string(to_string(id)) + "@" + std::to_string(level);
}

void validate_level(int level) {
  if (level < 1 || level > kNumLevels) {
    throw UsageError("distortion level " + std::to_string(level) +
                     " outside 1.." + std::to_string(kNumLevels));
  }
}

DistortionCatalog distortion_catalog(const DistortionGrouping& grouping) {
  DistortionCatalog catalog{{}, grouping};
  for (const auto& [name, members] : grouping.groups()) {
    for (const auto id : members) {
      if (static_cast<size_t>(id) >= kRegistry.size()) {
        throw ConfigError("grouping references an unregistered distortion");
      }
    }
  }
  for (const auto& r : kRegistry) {
    const std::string& group = grouping.group_of(r.id);
    for (int level = 1; level <= kNumLevels; ++level) {
      catalog.entries.push_back({r.id, level, group});
    }
  }
  return catalog;
}

double level_parameter(DistortionId id, int level) {
  validate_level(level);
  return registration(id).ladder[static_cast<size_t>(level - 1)];
}

uint64_t step_seed(uint64_t chain_seed, size_t index, DistortionId id) {
  return derive_seed(derive_seed(chain_seed, index), to_string(id));
}

// ---------------------------------------------------------------------------
// Pixel kernels. All arithmetic is float in [0, 1] on interleaved RGB;
// rounding to 8 bits happens once, when a distortion returns.

namespace {

struct FloatImage {
  int h = 0;
  int w = 0;
  std::vector<float> v;  // h * w * 3

  float& at(int y, int x, int c) { return v[(static_cast<size_t>(y) * w + x) * 3 + c]; }
  float at(int y, int x, int c) const {
    return v[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
};

FloatImage to_float(const ImageBuffer& img) {
  FloatImage f{img.height(), img.width(), {}};
  const auto src = img.data();
  f.v.resize(src.size());
  for (size_t i = 0; i < src.size(); ++i) f.v[i] = static_cast<float>(src[i]) / 255.0f;
  return f;
}

ImageBuffer to_u8(const FloatImage& f) {
  ImageBuffer img(f.h, f.w);
  auto dst = img.data();
  for (size_t i = 0; i < dst.size(); ++i) {
    const float s = std::clamp(f.v[i], 0.0f, 1.0f) * 255.0f;
    dst[i] = static_cast<uint8_t>(std::lround(s));
  }
  return img;
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

// Separable convolution of the selected channels with reflected borders.
void convolve_separable(FloatImage& f, const std::vector<float>& k,
                        std::array<bool, 3> channels = {true, true, true}) {
  const int r = static_cast<int>(k.size() / 2);
  FloatImage tmp = f;
  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        if (!channels[c]) continue;
        float acc = 0.0f;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * f.at(y, reflect(x + i, f.w), c);
        tmp.at(y, x, c) = acc;
      }
    }
  }
  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        if (!channels[c]) continue;
        float acc = 0.0f;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(reflect(y + i, f.h), x, c);
        f.at(y, x, c) = acc;
      }
    }
  }
}

struct Kernel2d {
  int radius = 0;
  std::vector<float> w;  // (2r+1)^2, normalized
};

FloatImage convolve2d(const FloatImage& f, const Kernel2d& k) {
  FloatImage out{f.h, f.w, std::vector<float>(f.v.size())};
  const int r = k.radius;
  const int side = 2 * r + 1;
  // Sparse tap list; disk and line kernels are mostly zero.
  struct Tap {
    int dy, dx;
    float w;
  };
  std::vector<Tap> taps;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const float w = k.w[static_cast<size_t>(dy + r) * side + dx + r];
      if (w != 0.0f) taps.push_back({dy, dx, w});
    }
  }
  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      float acc[3] = {0.0f, 0.0f, 0.0f};
      for (const auto& t : taps) {
        const int sy = reflect(y + t.dy, f.h);
        const int sx = reflect(x + t.dx, f.w);
        for (int c = 0; c < 3; ++c) acc[c] += t.w * f.at(sy, sx, c);
      }
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = acc[c];
    }
  }
  return out;
}

Kernel2d disk_kernel(double radius) {
  Kernel2d k;
  k.radius = static_cast<int>(std::ceil(radius));
  const int side = 2 * k.radius + 1;
  k.w.assign(static_cast<size_t>(side) * side, 0.0f);
  double sum = 0.0;
  for (int dy = -k.radius; dy <= k.radius; ++dy) {
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      const double coverage =
          std::clamp(radius + 0.5 - std::hypot(dy, dx), 0.0, 1.0);
      k.w[static_cast<size_t>(dy + k.radius) * side + dx + k.radius] =
          static_cast<float>(coverage);
      sum += coverage;
    }
  }
  for (auto& v : k.w) v = static_cast<float>(v / sum);
  return k;
}

Kernel2d line_kernel(double length, double angle) {
  Kernel2d k;
  const double half = (length - 1.0) / 2.0;
  k.radius = static_cast<int>(std::ceil(half)) + 1;
  const int side = 2 * k.radius + 1;
  k.w.assign(static_cast<size_t>(side) * side, 0.0f);
  const double ca = std::cos(angle), sa = std::sin(angle);
  double sum = 0.0;
  for (int dy = -k.radius; dy <= k.radius; ++dy) {
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      const double along = dx * ca + dy * sa;
      const double across = -dx * sa + dy * ca;
      const double w = std::clamp(1.0 - std::abs(across), 0.0, 1.0) *
                       std::clamp(half + 0.5 - std::abs(along), 0.0, 1.0);
      k.w[static_cast<size_t>(dy + k.radius) * side + dx + k.radius] =
          static_cast<float>(w);
      sum += w;
    }
  }
  for (auto& v : k.w) v = static_cast<float>(v / sum);
  return k;
}

float bilinear(const FloatImage& f, float y, float x, int c) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const float ty = y - static_cast<float>(y0);
  const float tx = x - static_cast<float>(x0);
  const int ya = reflect(y0, f.h), yb = reflect(y0 + 1, f.h);
  const int xa = reflect(x0, f.w), xb = reflect(x0 + 1, f.w);
  return (f.at(ya, xa, c) * (1 - tx) + f.at(ya, xb, c) * tx) * (1 - ty) +
         (f.at(yb, xa, c) * (1 - tx) + f.at(yb, xb, c) * tx) * ty;
}

// sRGB <-> CIELAB (D65).
float srgb_to_linear(float c) {
  return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

float linear_to_srgb(float c) {
  c = std::max(c, 0.0f);
  return c <= 0.0031308f ? 12.92f * c : 1.055f * std::pow(c, 1.0f / 2.4f) - 0.055f;
}

constexpr float kXn = 0.95047f, kYn = 1.0f, kZn = 1.08883f;

float lab_f(float t) {
  constexpr float d = 6.0f / 29.0f;
  return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0f / 29.0f;
}

float lab_finv(float t) {
  constexpr float d = 6.0f / 29.0f;
  return t > d ? t * t * t : 3 * d * d * (t - 4.0f / 29.0f);
}

// In place: channel 0 = L, 1 = a, 2 = b.
void rgb_to_lab(FloatImage& f) {
  for (size_t i = 0; i < f.v.size(); i += 3) {
    const float r = srgb_to_linear(f.v[i]);
    const float g = srgb_to_linear(f.v[i + 1]);
    const float b = srgb_to_linear(f.v[i + 2]);
    const float x = 0.4124564f * r + 0.3575761f * g + 0.1804375f * b;
    const float y = 0.2126729f * r + 0.7151522f * g + 0.0721750f * b;
    const float z = 0.0193339f * r + 0.1191920f * g + 0.9503041f * b;
    const float fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
    f.v[i] = 116.0f * fy - 16.0f;
    f.v[i + 1] = 500.0f * (fx - fy);
    f.v[i + 2] = 200.0f * (fy - fz);
  }
}

void lab_to_rgb(FloatImage& f) {
  for (size_t i = 0; i < f.v.size(); i += 3) {
    const float fy = (f.v[i] + 16.0f) / 116.0f;
    const float fx = fy + f.v[i + 1] / 500.0f;
    const float fz = fy - f.v[i + 2] / 200.0f;
    const float x = kXn * lab_finv(fx), y = kYn * lab_finv(fy), z = kZn * lab_finv(fz);
    const float r = 3.2404542f * x - 1.5371385f * y - 0.4985314f * z;
    const float g = -0.9692660f * x + 1.8760108f * y + 0.0415560f * z;
    const float b = 0.0556434f * x - 0.2040259f * y + 1.0572252f * z;
    f.v[i] = linear_to_srgb(r);
    f.v[i + 1] = linear_to_srgb(g);
    f.v[i + 2] = linear_to_srgb(b);
  }
}

// Unit normal field shared by all levels of one family.
std::vector<float> normal_field(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> z(n);
  for (auto& v : z) v = static_cast<float>(rng.normal());
  return z;
}

std::vector<float> uniform_field(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> u(n);
  for (auto& v : u) v = static_cast<float>(rng.uniform());
  return u;
}

FloatImage add_white_noise(FloatImage f, double sigma, uint64_t seed) {
  const auto z = normal_field(f.v.size(), seed);
  const auto s = static_cast<float>(sigma);
  for (size_t i = 0; i < f.v.size(); ++i) f.v[i] += s * z[i];
  return f;
}

FloatImage white_noise_color(FloatImage f, double sigma, uint64_t seed) {
  // Noise on the chroma planes of YCbCr (BT.601).
  const size_t n = static_cast<size_t>(f.h) * f.w;
  const auto z = normal_field(2 * n, seed);
  const auto s = static_cast<float>(sigma);
  for (size_t p = 0; p < n; ++p) {
    float* px = &f.v[3 * p];
    const float y = 0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2];
    const float cb = -0.168736f * px[0] - 0.331264f * px[1] + 0.5f * px[2] + s * z[2 * p];
    const float cr = 0.5f * px[0] - 0.418688f * px[1] - 0.081312f * px[2] + s * z[2 * p + 1];
    px[0] = y + 1.402f * cr;
    px[1] = y - 0.344136f * cb - 0.714136f * cr;
    px[2] = y + 1.772f * cb;
  }
  return f;
}

FloatImage impulse_noise(FloatImage f, double density, uint64_t seed) {
  const size_t n = static_cast<size_t>(f.h) * f.w;
  const auto hit = uniform_field(n, derive_seed(seed, "hit"));
  const auto salt = uniform_field(n, derive_seed(seed, "salt"));
  for (size_t p = 0; p < n; ++p) {
    if (hit[p] >= density) continue;
    const float v = salt[p] < 0.5f ? 0.0f : 1.0f;
    for (int c = 0; c < 3; ++c) f.v[3 * p + c] = v;
  }
  return f;
}

FloatImage multiplicative_noise(FloatImage f, double sigma, uint64_t seed) {
  const auto z = normal_field(f.v.size(), seed);
  const auto s = static_cast<float>(sigma);
  for (size_t i = 0; i < f.v.size(); ++i) f.v[i] *= 1.0f + s * z[i];
  return f;
}

FloatImage denoise_oversmooth(FloatImage f, double sigma, uint64_t seed) {
  // Noise followed by a Gaussian "denoiser" tuned for it; the residual
  // noise plus the lost detail both grow with the level.
  f = add_white_noise(std::move(f), sigma, seed);
  convolve_separable(f, gaussian_kernel(0.5 + 12.0 * sigma));
  return f;
}

FloatImage jitter(const FloatImage& f, double amplitude, uint64_t seed) {
  const size_t n = static_cast<size_t>(f.h) * f.w;
  const auto z = normal_field(2 * n, seed);
  const auto a = static_cast<float>(amplitude);
  FloatImage out = f;
  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      const size_t p = static_cast<size_t>(y) * f.w + x;
      const float sy = static_cast<float>(y) + a * z[2 * p];
      const float sx = static_cast<float>(x) + a * z[2 * p + 1];
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = bilinear(f, sy, sx, c);
    }
  }
  return out;
}

FloatImage pixelate(const FloatImage& f, int block) {
  FloatImage out = f;
  for (int by = 0; by < f.h; by += block) {
    for (int bx = 0; bx < f.w; bx += block) {
      const int ey = std::min(f.h, by + block), ex = std::min(f.w, bx + block);
      const float count = static_cast<float>((ey - by) * (ex - bx));
      for (int c = 0; c < 3; ++c) {
        float sum = 0.0f;
        for (int y = by; y < ey; ++y)
          for (int x = bx; x < ex; ++x) sum += f.at(y, x, c);
        const float mean = sum / count;
        for (int y = by; y < ey; ++y)
          for (int x = bx; x < ex; ++x) out.at(y, x, c) = mean;
      }
    }
  }
  return out;
}

FloatImage color_shift(const FloatImage& f, double offset, uint64_t seed) {
  Rng rng(seed);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const auto dy = static_cast<float>(offset * std::sin(angle));
  const auto dx = static_cast<float>(offset * std::cos(angle));
  FloatImage out = f;
  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      out.at(y, x, 1) = bilinear(f, static_cast<float>(y) + dy, static_cast<float>(x) + dx, 1);
    }
  }
  return out;
}

FloatImage color_quantization(FloatImage f, double levels) {
  const float steps = static_cast<float>(levels) - 1.0f;
  for (auto& v : f.v) v = std::round(std::clamp(v, 0.0f, 1.0f) * steps) / steps;
  return f;
}

FloatImage desaturate(FloatImage f, double keep) {
  const auto k = static_cast<float>(keep);
  for (size_t i = 0; i < f.v.size(); i += 3) {
    // HSV value is the channel maximum; scaling S moves channels toward it.
    const float value = std::max({f.v[i], f.v[i + 1], f.v[i + 2]});
    for (int c = 0; c < 3; ++c) f.v[i + c] = value - k * (value - f.v[i + c]);
  }
  return f;
}

FloatImage oversaturate(FloatImage f, double gain) {
  rgb_to_lab(f);
  const auto g = static_cast<float>(gain);
  for (size_t i = 0; i < f.v.size(); i += 3) {
    f.v[i + 1] *= g;
    f.v[i + 2] *= g;
  }
  lab_to_rgb(f);
  return f;
}

FloatImage color_diffuse(FloatImage f, double sigma) {
  rgb_to_lab(f);
  convolve_separable(f, gaussian_kernel(sigma), {false, true, true});
  lab_to_rgb(f);
  return f;
}

FloatImage brighten(FloatImage f, double gamma) {
  const auto g = static_cast<float>(gamma);
  for (auto& v : f.v) v = 1.0f - std::pow(1.0f - std::clamp(v, 0.0f, 1.0f), g);
  return f;
}

FloatImage darken(FloatImage f, double gamma) {
  const auto g = static_cast<float>(gamma);
  for (auto& v : f.v) v = std::pow(std::clamp(v, 0.0f, 1.0f), g);
  return f;
}

FloatImage mean_shift(FloatImage f, double delta) {
  const auto d = static_cast<float>(delta);
  for (auto& v : f.v) v += d;
  return f;
}

int kernel_support(const DistortionSpec& spec) {
  const double p = level_parameter(spec.id, spec.level);
  switch (spec.id) {
    case DistortionId::kGaussianBlur:
      return 2 * static_cast<int>(std::ceil(3.0 * p)) + 1;
    case DistortionId::kLensBlur:
      return 2 * static_cast<int>(std::ceil(p)) + 1;
    case DistortionId::kMotionBlur:
      return static_cast<int>(p) + 2;
    case DistortionId::kColorDiffuse:
      return 2 * static_cast<int>(std::ceil(3.0 * p)) + 1;
    case DistortionId::kDenoiseOversmooth:
      return 2 * static_cast<int>(std::ceil(3.0 * (0.5 + 12.0 * p))) + 1;
    case DistortionId::kPixelate:
      return static_cast<int>(p);
    case DistortionId::kJpeg:
    case DistortionId::kJpeg2000:
      return 16;
    default:
      return 2;
  }
}

}  // namespace

int min_support(const DistortionSpec& spec) {
  // Reflected borders need the kernel to fit inside the image.
  return kernel_support(spec);
}

ImageBuffer apply_distortion(const ImageBuffer& img, const DistortionSpec& spec,
                             uint64_t seed) {
  validate_level(spec.level);
  const double p = level_parameter(spec.id, spec.level);
  if (img.empty()) throw UsageError("apply_distortion: empty image");
  const int support = min_support(spec);
  if (img.height() < support || img.width() < support) {
    throw DataError("image " + std::to_string(img.height()) + "x" +
                    std::to_string(img.width()) + " too small for " + spec.label() +
                    " (kernel support " + std::to_string(support) + ")");
  }

  switch (spec.id) {
    case DistortionId::kJpeg:
      return jpeg_roundtrip(img, static_cast<int>(p));
    case DistortionId::kJpeg2000:
      return jpeg2000_roundtrip(img, static_cast<int>(p));
    default:
      break;
  }

  FloatImage f = to_float(img);
  switch (spec.id) {
    case DistortionId::kGaussianBlur:
      convolve_separable(f, gaussian_kernel(p));
      break;
    case DistortionId::kLensBlur:
      f = convolve2d(f, disk_kernel(p));
      break;
    case DistortionId::kMotionBlur: {
      Rng rng(seed);
      f = convolve2d(f, line_kernel(p, rng.uniform(0.0, std::numbers::pi)));
      break;
    }
    case DistortionId::kColorDiffuse:
      f = color_diffuse(std::move(f), p);
      break;
    case DistortionId::kColorShift:
      f = color_shift(f, p, seed);
      break;
    case DistortionId::kColorQuantization:
      f = color_quantization(std::move(f), p);
      break;
    case DistortionId::kColorSaturate1:
      f = desaturate(std::move(f), p);
      break;
    case DistortionId::kColorSaturate2:
      f = oversaturate(std::move(f), p);
      break;
    case DistortionId::kBrighten:
      f = brighten(std::move(f), p);
      break;
    case DistortionId::kDarken:
      f = darken(std::move(f), p);
      break;
    case DistortionId::kMeanShift:
      f = mean_shift(std::move(f), p);
      break;
    case DistortionId::kWhiteNoise:
      f = add_white_noise(std::move(f), p, seed);
      break;
    case DistortionId::kWhiteNoiseColor:
      f = white_noise_color(std::move(f), p, seed);
      break;
    case DistortionId::kImpulseNoise:
      f = impulse_noise(std::move(f), p, seed);
      break;
    case DistortionId::kMultiplicativeNoise:
      f = multiplicative_noise(std::move(f), p, seed);
      break;
    case DistortionId::kDenoiseOversmooth:
      f = denoise_oversmooth(std::move(f), p, seed);
      break;
    case DistortionId::kJitter:
      f = jitter(f, p, seed);
      break;
    case DistortionId::kPixelate:
      f = pixelate(f, static_cast<int>(p));
      break;
    case DistortionId::kJpeg:
    case DistortionId::kJpeg2000:
      break;
  }
  return to_u8(f);
}

ImageBuffer apply_chain(const ImageBuffer& img,
                        std::span<const DistortionSpec> chain,
                        uint64_t chain_seed) {
  ImageBuffer current = img;
  for (size_t i = 0; i < chain.size(); ++i) {
    current = apply_distortion(current, chain[i],
                               step_seed(chain_seed, i, chain[i].id));
  }
  return current;
}

}  // namespace triqa
