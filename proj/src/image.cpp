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

#include "triqa/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "triqa/errors.hpp"
#include "triqa/seeding.hpp"

namespace triqa {

ImageBuffer::ImageBuffer(int height, int width, uint8_t fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw UsageError("negative image dimensions");
  pixels_.assign(static_cast<size_t>(height) * width * 3, fill);
}

ImageBuffer::ImageBuffer(int height, int width, std::vector<uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < 0 || width < 0) throw UsageError("negative image dimensions");
  if (pixels_.size() != static_cast<size_t>(height) * width * 3) {
    throw UsageError("pixel buffer does not match " + std::to_string(height) +
                     "x" + std::to_string(width) + "x3");
  }
}

ImageBuffer ImageBuffer::crop(int y, int x, int h, int w) const {
  if (y < 0 || x < 0 || h < 0 || w < 0 || y + h > height_ || x + w > width_) {
    throw UsageError("crop window outside the image");
  }
  ImageBuffer out(h, w);
  for (int r = 0; r < h; ++r) {
    const auto* src = &pixels_[index(y + r, x, 0)];
    std::copy(src, src + static_cast<size_t>(w) * 3, &out.at(r, 0, 0));
  }
  return out;
}

void require_min_size(const ImageBuffer& img, int min_side, const char* what) {
  if (img.height() < min_side || img.width() < min_side) {
    throw DataError(std::string(what) + ": image is " +
                    std::to_string(img.height()) + "x" +
                    std::to_string(img.width()) + ", need at least " +
                    std::to_string(min_side) + " per side");
  }
}

namespace {

cv::Mat to_bgr_mat(const ImageBuffer& img) {
  cv::Mat mat(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<uint8_t>(y);
    for (int x = 0; x < img.width(); ++x) {
      row[3 * x + 0] = img.at(y, x, 2);
      row[3 * x + 1] = img.at(y, x, 1);
      row[3 * x + 2] = img.at(y, x, 0);
    }
  }
  return mat;
}

ImageBuffer from_bgr_mat(const cv::Mat& mat) {
  cv::Mat bgr;
  if (mat.channels() == 1) {
    cv::Mat channels[] = {mat, mat, mat};
    cv::merge(channels, 3, bgr);
  } else if (mat.channels() == 4) {
    cv::Mat parts[4];
    cv::split(mat, parts);
    cv::Mat channels[] = {parts[0], parts[1], parts[2]};
    cv::merge(channels, 3, bgr);
  } else {
    bgr = mat;
  }
  if (bgr.depth() != CV_8U) throw DataError("only 8-bit images are supported");
  ImageBuffer img(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<uint8_t>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(y, x, 0) = row[3 * x + 2];
      img.at(y, x, 1) = row[3 * x + 1];
      img.at(y, x, 2) = row[3 * x + 0];
    }
  }
  return img;
}

ImageBuffer codec_roundtrip(const ImageBuffer& img, const std::string& ext,
                            const std::vector<int>& params) {
  std::vector<uint8_t> encoded;
  if (!cv::imencode(ext, to_bgr_mat(img), encoded, params)) {
    throw DataError("failed to encode " + ext);
  }
  const cv::Mat decoded = cv::imdecode(encoded, cv::IMREAD_COLOR);
  if (decoded.empty()) throw DataError("failed to decode " + ext);
  return from_bgr_mat(decoded);
}

}  // namespace

ImageBuffer read_image(const std::filesystem::path& path) {
  const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("cannot read image " + path.string());
  return from_bgr_mat(mat);
}

void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.empty()) throw UsageError("refusing to write an empty image");
  if (!cv::imwrite(path.string(), to_bgr_mat(img),
                   {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw DataError("cannot write " + path.string());
  }
}

ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) {
  return codec_roundtrip(img, ".jpg",
                         {cv::IMWRITE_JPEG_QUALITY, quality,
                          cv::IMWRITE_JPEG_OPTIMIZE, 0});
}

ImageBuffer jpeg2000_roundtrip(const ImageBuffer& img, int compression_x1000) {
  return codec_roundtrip(img, ".jp2",
                         {cv::IMWRITE_JPEG2000_COMPRESSION_X1000,
                          compression_x1000});
}

double psnr(const ImageBuffer& reference, const ImageBuffer& test) {
  if (reference.height() != test.height() ||
      reference.width() != test.width()) {
    throw UsageError("psnr: image dimensions differ");
  }
  if (reference.empty()) throw UsageError("psnr: empty images");
  const auto a = reference.data();
  const auto b = test.data();
  uint64_t sse = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    sse += static_cast<uint64_t>(d * d);
  }
  if (sse == 0) return std::numeric_limits<double>::infinity();
  const double mse = static_cast<double>(sse) / static_cast<double>(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

// Smoothly interpolated lattice noise in [-1, 1].
class ValueNoise {
 public:
  ValueNoise(int height, int width, double cell, Rng& rng)
      : cell_(cell),
        rows_(static_cast<int>(height / cell) + 3),
        cols_(static_cast<int>(width / cell) + 3),
        lattice_(static_cast<size_t>(rows_) * cols_) {
    for (auto& v : lattice_) v = rng.uniform(-1.0, 1.0);
  }

  double operator()(double y, double x) const {
    const double fy = y / cell_;
    const double fx = x / cell_;
    const int iy = static_cast<int>(fy);
    const int ix = static_cast<int>(fx);
    const double ty = smooth(fy - iy);
    const double tx = smooth(fx - ix);
    const double v00 = lattice_[static_cast<size_t>(iy) * cols_ + ix];
    const double v01 = lattice_[static_cast<size_t>(iy) * cols_ + ix + 1];
    const double v10 = lattice_[static_cast<size_t>(iy + 1) * cols_ + ix];
    const double v11 = lattice_[static_cast<size_t>(iy + 1) * cols_ + ix + 1];
    return (v00 * (1 - tx) + v01 * tx) * (1 - ty) +
           (v10 * (1 - tx) + v11 * tx) * ty;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

  double cell_;
  int rows_;
  int cols_;
  std::vector<double> lattice_;
};

double smoothstep(double edge0, double edge1, double x) {
  const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

ImageBuffer synthesize_pristine(int height, int width, uint64_t seed) {
  if (height <= 0 || width <= 0) throw UsageError("invalid synthetic size");
  Rng rng(seed);
  const size_t n = static_cast<size_t>(height) * width;
  std::vector<double> rgb(n * 3);

  std::array<double, 3> c0{}, c1{};
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(0.15, 0.85);
    c1[c] = rng.uniform(0.15, 0.85);
  }
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(angle), gy = std::sin(angle);
  const double span = std::abs(gx) * width + std::abs(gy) * height;

  std::vector<ValueNoise> luma_octaves;
  std::vector<double> luma_amp;
  for (double cell = 96.0, amp = 0.12; cell >= 3.0; cell /= 2.0, amp *= 0.62) {
    luma_octaves.emplace_back(height, width, cell, rng);
    luma_amp.push_back(amp);
  }
  std::array<ValueNoise, 3> chroma = {ValueNoise(height, width, 48.0, rng),
                                      ValueNoise(height, width, 48.0, rng),
                                      ValueNoise(height, width, 48.0, rng)};

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = std::clamp(
          ((x - width / 2.0) * gx + (y - height / 2.0) * gy) / span + 0.5, 0.0,
          1.0);
      double texture = 0.0;
      for (size_t o = 0; o < luma_octaves.size(); ++o) {
        texture += luma_amp[o] * luma_octaves[o](y, x);
      }
      for (int c = 0; c < 3; ++c) {
        rgb[(static_cast<size_t>(y) * width + x) * 3 + c] =
            c0[c] * (1 - t) + c1[c] * t + texture + 0.06 * chroma[c](y, x);
      }
    }
  }

  const int shapes = 10 + static_cast<int>(rng.below(12));
  for (int s = 0; s < shapes; ++s) {
    const double cy = rng.uniform(0.0, height);
    const double cx = rng.uniform(0.0, width);
    const double ry = rng.uniform(0.04, 0.28) * height;
    const double rx = rng.uniform(0.04, 0.28) * width;
    const bool rect = rng.uniform() < 0.4;
    const double rot = rng.uniform(0.0, std::numbers::pi);
    const double cr = std::cos(rot), sr = std::sin(rot);
    std::array<double, 3> color{};
    for (auto& v : color) v = rng.uniform(0.05, 0.95);
    const double opacity = rng.uniform(0.55, 0.95);
    const double stripe_freq = rng.uniform() < 0.35 ? rng.uniform(0.15, 0.6) : 0.0;
    const double stripe_amp = rng.uniform(0.05, 0.18);
    const double edge = rng.uniform(0.6, 2.5);
    const int y0 = std::max(0, static_cast<int>(cy - std::max(rx, ry) - 4));
    const int y1 = std::min(height, static_cast<int>(cy + std::max(rx, ry) + 4));
    const int x0 = std::max(0, static_cast<int>(cx - std::max(rx, ry) - 4));
    const int x1 = std::min(width, static_cast<int>(cx + std::max(rx, ry) + 4));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double dy = y - cy, dx = x - cx;
        const double u = (dx * cr + dy * sr) / rx;
        const double v = (-dx * sr + dy * cr) / ry;
        // Signed distance proxy in pixels; negative inside.
        const double dist = rect ? (std::max(std::abs(u), std::abs(v)) - 1.0) *
                                       std::min(rx, ry)
                                 : (std::hypot(u, v) - 1.0) * std::min(rx, ry);
        const double alpha = opacity * (1.0 - smoothstep(-edge, edge, dist));
        if (alpha <= 0.0) continue;
        const double stripes =
            stripe_freq > 0.0 ? stripe_amp * std::sin(stripe_freq * (dx * cr + dy * sr))
                              : 0.0;
        for (int c = 0; c < 3; ++c) {
          double& p = rgb[(static_cast<size_t>(y) * width + x) * 3 + c];
          p = p * (1 - alpha) + (color[c] + stripes) * alpha;
        }
      }
    }
  }

  ImageBuffer img(height, width);
  auto out = img.data();
  for (size_t i = 0; i < out.size(); ++i) {
    const double grain = 0.004 * rng.normal();
    out[i] = static_cast<uint8_t>(
        std::lround(std::clamp(rgb[i] + grain, 0.0, 1.0) * 255.0));
  }
  return img;
}

}  // namespace triqa
