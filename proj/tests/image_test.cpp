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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "triqa/errors.hpp"

namespace triqa {
namespace {

// Independent PSNR: straightforward loop over every sample.
double psnr_oracle(const ImageBuffer& a, const ImageBuffer& b) {
  double se = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = double(a.at(y, x, c)) - double(b.at(y, x, c));
        se += d * d;
      }
  const double mse = se / (3.0 * a.height() * a.width());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

TEST(Psnr, MatchesBruteForce) {
  const ImageBuffer a = synthesize_pristine(64, 48, 1);
  const ImageBuffer b = synthesize_pristine(64, 48, 2);
  EXPECT_NEAR(psnr(a, b), psnr_oracle(a, b), 1e-9);
}

TEST(Psnr, IdenticalImagesAreInfinite) {
  const ImageBuffer a = synthesize_pristine(32, 32, 1);
  EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
}

TEST(Psnr, SizeMismatchIsAnError) {
  EXPECT_THROW(psnr(ImageBuffer(8, 8), ImageBuffer(8, 9)), UsageError);
}

TEST(ImageBuffer, CropCopiesTheWindow) {
  const ImageBuffer a = synthesize_pristine(40, 30, 4);
  const ImageBuffer c = a.crop(5, 7, 10, 12);
  ASSERT_EQ(c.height(), 10);
  ASSERT_EQ(c.width(), 12);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(c.at(y, x, ch), a.at(y + 5, x + 7, ch));
}

TEST(ImageIo, PngRoundTripIsLossless) {
  testing::TempDir dir("image_io");
  const ImageBuffer a = synthesize_pristine(37, 53, 8);
  write_png(a, dir / "a.png");
  EXPECT_EQ(read_image(dir / "a.png"), a);
}

TEST(ImageIo, MissingFileIsADataError) {
  EXPECT_THROW(read_image("/nonexistent/triqa.png"), DataError);
}

TEST(Synthesize, DeterministicInSeed) {
  EXPECT_EQ(synthesize_pristine(64, 64, 3), synthesize_pristine(64, 64, 3));
  EXPECT_NE(synthesize_pristine(64, 64, 3), synthesize_pristine(64, 64, 4));
}

TEST(Codecs, JpegQualityOrdersFidelity) {
  const ImageBuffer a = synthesize_pristine(96, 96, 5);
  EXPECT_GT(psnr(a, jpeg_roundtrip(a, 90)), psnr(a, jpeg_roundtrip(a, 10)));
  EXPECT_EQ(jpeg_roundtrip(a, 50), jpeg_roundtrip(a, 50));
}

TEST(Codecs, Jpeg2000RateOrdersFidelity) {
  const ImageBuffer a = synthesize_pristine(96, 96, 6);
  EXPECT_GT(psnr(a, jpeg2000_roundtrip(a, 200)), psnr(a, jpeg2000_roundtrip(a, 10)));
}

TEST(MinSize, SmallImagesAreRejected) {
  EXPECT_THROW(require_min_size(ImageBuffer(255, 300), kMinRenderSide, "test"), DataError);
  EXPECT_NO_THROW(require_min_size(ImageBuffer(256, 256), kMinRenderSide, "test"));
}

}  // namespace
}  // namespace triqa
