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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace triqa {

/// Smallest side accepted by triplet rendering and training crops.
inline constexpr int kMinRenderSide = 256;

/// Interleaved 8-bit sRGB image, row-major, 3 samples per pixel.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int height, int width, uint8_t fill = 0);
  ImageBuffer(int height, int width, std::vector<uint8_t> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return pixels_.empty(); }
  size_t size() const { return pixels_.size(); }

  uint8_t& at(int y, int x, int c) { return pixels_[index(y, x, c)]; }
  uint8_t at(int y, int x, int c) const { return pixels_[index(y, x, c)]; }

  std::span<uint8_t> data() { return pixels_; }
  std::span<const uint8_t> data() const { return pixels_; }

  /// Copy of the window [y, y+h) x [x, x+w).
  ImageBuffer crop(int y, int x, int h, int w) const;

  bool operator==(const ImageBuffer&) const = default;

 private:
  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * 3 + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> pixels_;
};

/// Throws DataError unless both sides are at least `min_side`.
void require_min_size(const ImageBuffer& img, int min_side, const char* what);

/// Decodes any format OpenCV understands (PNG, JPEG, ...); always RGB.
ImageBuffer read_image(const std::filesystem::path& path);

/// Lossless PNG output.
void write_png(const ImageBuffer& img, const std::filesystem::path& path);

/// In-memory codec round trips used by the compression distortions.
ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality);
ImageBuffer jpeg2000_roundtrip(const ImageBuffer& img, int compression_x1000);

/// Peak signal-to-noise ratio over the 8-bit range, in dB. Returns
/// +infinity for identical images; throws UsageError on a size mismatch.
double psnr(const ImageBuffer& reference, const ImageBuffer& test);

/// Procedurally generated "pristine" photograph stand-in: smooth shading,
/// soft-edged coloured shapes and multi-octave texture. Deterministic in
/// `seed`. Used for desk-scale corpora and tests.
ImageBuffer synthesize_pristine(int height, int width, uint64_t seed);

}  // namespace triqa
