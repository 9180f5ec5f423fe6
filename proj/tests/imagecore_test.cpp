// Copyright 2026 The iqastack Authors. All Rights Reserved.
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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "iqa/error.hpp"
#include "iqa/image.hpp"
#include "iqa/kernels.hpp"
#include "iqa/parallel.hpp"
#include "iqa/rng.hpp"

namespace iqa {
namespace {

namespace fs = std::filesystem;

ImageTensor ramp(int h, int w) {
  ImageTensor img(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>((r * w + c) * 3 + ch) / (h * w * 3);
    }
  }
  return img;
}

ImageTensor noise_image(int h, int w, std::uint64_t seed) {
  ImageTensor img(h, w);
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<float>(rng.uniform(i));
  return img;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "iqa_imagecore_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(ImageTensor, ShapeContract) {
  EXPECT_THROW(ImageTensor(0, 4), ConfigError);
  EXPECT_THROW(ImageTensor(3, 3, std::vector<float>(26)), ConfigError);
  const ImageTensor img(2, 5);
  EXPECT_EQ(img.data().size(), 2u * 5u * 3u);
  EXPECT_TRUE(img.in_unit_range());
}

TEST(Normalization, ByteMapping) {
  Rgb8Image raw{1, 3, {255, 255, 255, 0, 0, 0, 128, 128, 128}};
  const ImageTensor img = from_rgb8(raw);
  EXPECT_EQ(img.at(0, 0, 0), 1.0f);
  EXPECT_EQ(img.at(0, 1, 1), 0.0f);
  EXPECT_EQ(img.at(0, 2, 2), 128.0f / 255.0f);
}

TEST(Quantize, RoundsHalfAwayFromZero) {
  EXPECT_EQ(quantize_channel(1.0f), 255);
  EXPECT_EQ(quantize_channel(0.5f), 128);
  EXPECT_EQ(quantize_channel(0.0f), 0);
  EXPECT_EQ(quantize_channel(-0.2f), 0);
  EXPECT_EQ(quantize_channel(1.7f), 255);
}

TEST(Quantize, EveryByteSurvivesRoundTrip) {
  Rgb8Image raw{1, 256, std::vector<std::uint8_t>(256 * 3)};
  for (int v = 0; v < 256; ++v) {
    for (int ch = 0; ch < 3; ++ch) raw.bytes[v * 3 + ch] = static_cast<std::uint8_t>(v);
  }
  const Rgb8Image back = to_rgb8(from_rgb8(raw));
  EXPECT_EQ(back.bytes, raw.bytes);
}

TEST(Codec, RoundTripErrorWithinHalfStep) {
  const ImageTensor img = noise_image(17, 23, 5);
  for (const char* ext : {".png", ".ppm"}) {
    const fs::path p = scratch(std::string("roundtrip") + ext);
    save_image(img, p);
    const ImageTensor back = load_image(p);
    ASSERT_EQ(back.height(), img.height());
    ASSERT_EQ(back.width(), img.width());
    float worst = 0.0f;
    for (std::size_t i = 0; i < img.data().size(); ++i) worst = std::max(worst, std::fabs(back.data()[i] - img.data()[i]));
    EXPECT_LE(worst, 1.0f / 510.0f + 1e-7f) << ext;
  }
}

TEST(Codec, PpmBytesRoundTrip) {
  Rgb8Image raw{2, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 250, 251, 252}};
  const Rgb8Image back = decode_ppm(encode_ppm(raw));
  EXPECT_EQ(back.height, 2);
  EXPECT_EQ(back.bytes, raw.bytes);
}

TEST(Codec, Errors) {
  EXPECT_THROW(load_image(scratch("does_not_exist.png")), DataError);
  const std::vector<std::uint8_t> gray = {'P', '5', '\n', '1', ' ', '1', '\n', '2', '5', '5', '\n', 0};
  EXPECT_THROW(decode_ppm(gray), DataError);
  EXPECT_THROW(save_image(ramp(2, 2), scratch("x.bmp")), ConfigError);
}

TEST(Crop, FixedOriginIsSubBlock) {
  const ImageTensor img = ramp(100, 100);
  const ImageTensor patch = crop(img, {64, CropOrigin{0, 0}}, 0);
  ASSERT_EQ(patch.height(), 64);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) EXPECT_EQ(patch.at(r, c, 1), img.at(r, c, 1));
  }
}

TEST(Crop, FullSizeIsIdentity) {
  const ImageTensor img = ramp(30, 30);
  EXPECT_EQ(crop(img, {30, std::nullopt}, 9), img);
}

TEST(Crop, RandomOriginDeterministicAndUniform) {
  const ImageTensor img = ramp(6, 6);
  EXPECT_EQ(crop(img, {4, std::nullopt}, 77), crop(img, {4, std::nullopt}, 77));
  // 3 x 3 valid origins; identify each by its top-left value.
  std::map<float, int> counts;
  const int draws = 9000;
  for (int s = 0; s < draws; ++s) ++counts[crop(img, {4, std::nullopt}, static_cast<std::uint64_t>(s)).at(0, 0, 0)];
  ASSERT_EQ(counts.size(), 9u);
  for (const auto& [value, n] : counts) EXPECT_NEAR(n, draws / 9, 150) << value;
}

TEST(Crop, TooLargeFails) {
  EXPECT_THROW(crop(ramp(10, 12), {11, std::nullopt}, 0), ConfigError);
  EXPECT_THROW(crop(ramp(10, 12), {4, CropOrigin{8, 0}}, 0), ConfigError);
}

TEST(Augment, TranslateZeroIsIdentity) {
  const ImageTensor img = noise_image(20, 20, 1);
  EXPECT_EQ(augment(img, {AugmentKind::kTranslate, 0.0, 3}), img);
}

TEST(Augment, TranslateIsPureIndexShift) {
  const ImageTensor img = noise_image(20, 24, 2);
  const ImageTensor out = translate(img, 2, -1);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 24; ++c) {
      const int sr = std::clamp(r - 2, 0, 19);
      const int sc = std::clamp(c + 1, 0, 23);
      EXPECT_EQ(out.at(r, c, 0), img.at(sr, sc, 0));
    }
  }
}

TEST(Augment, QuarterTurnMatchesPermutationOracle) {
  const int n = 9;
  const ImageTensor img = noise_image(n, n, 4);
  AugmentBounds wide;
  wide.max_rotate_degrees = 90.0;
  const ImageTensor out = augment(img, {AugmentKind::kRotate, 90.0, 0}, wide);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out.at(r, c, ch), img.at(c, n - 1 - r, ch));
    }
  }
}

TEST(Augment, BoundsEnforced) {
  const ImageTensor img = noise_image(40, 50, 5);
  EXPECT_THROW(augment(img, {AugmentKind::kRotate, 15.5, 0}), ConfigError);
  EXPECT_NO_THROW(augment(img, {AugmentKind::kRotate, -15.0, 0}));
  EXPECT_THROW(augment(img, {AugmentKind::kTranslate, 4.5, 0}), ConfigError);
  EXPECT_NO_THROW(augment(img, {AugmentKind::kTranslate, 4.0, 0}));
  EXPECT_THROW(augment(img, {AugmentKind::kRandomCrop, 41.0, 0}), ConfigError);
}

TEST(Augment, DeterministicInRangeAndShaped) {
  const ImageTensor img = noise_image(32, 32, 6);
  for (const AugmentOp op : {AugmentOp{AugmentKind::kTranslate, 3.0, 11}, AugmentOp{AugmentKind::kRotate, 12.5, 11},
                             AugmentOp{AugmentKind::kRandomCrop, 20.0, 11}}) {
    const ImageTensor a = augment(img, op);
    EXPECT_EQ(a, augment(img, op));
    EXPECT_TRUE(a.in_unit_range());
    const int side = op.kind == AugmentKind::kRandomCrop ? 20 : 32;
    EXPECT_EQ(a.height(), side);
    EXPECT_EQ(a.width(), side);
  }
}

TEST(Kernels, TapsNormalized) {
  for (double sigma : {0.5, 1.0, 3.0}) {
    const auto t = kernels::gaussian_taps(sigma);
    EXPECT_EQ(t.size() % 2, 1u);
    EXPECT_NEAR(std::accumulate(t.begin(), t.end(), 0.0), 1.0, 1e-6);
  }
  const auto d = kernels::disk_kernel(2.5);
  EXPECT_NEAR(std::accumulate(d.taps.begin(), d.taps.end(), 0.0), 1.0, 1e-6);
}

TEST(Kernels, ConvolutionOfConstantIsConstant) {
  ImageTensor flat(12, 12);
  std::fill(flat.data().begin(), flat.data().end(), 0.25f);
  const ImageTensor out = kernels::separable_convolve(flat, kernels::gaussian_taps(1.5));
  for (float v : out.data()) EXPECT_NEAR(v, 0.25f, 1e-6f);
}

TEST(Kernels, MatmulMatchesNaiveOracle) {
  Matrix a(3, 4);
  Matrix b(2, 4);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = static_cast<double>(i) - 5.0;
  for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 0.5 * static_cast<double>(i);
  const Matrix c = kernels::matmul_nt(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(j, k);
      EXPECT_DOUBLE_EQ(c(i, j), s);
    }
  }
}

// Serial reference vs OpenMP kernel, bit-for-bit, at 1 and 4 threads.
class KernelParity : public ::testing::TestWithParam<int> {};

TEST_P(KernelParity, BitIdenticalToSerial) {
  ScopedThreads threads(GetParam());
  const ImageTensor img = synthesize_scene(48, 40, 3);
  const auto taps = kernels::gaussian_taps(1.7);
  const auto disk = kernels::disk_kernel(3.0);
  std::vector<kernels::SamplePoint> pts(img.pixel_count());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto r = static_cast<float>(i / 40);
    const auto c = static_cast<float>(i % 40);
    pts[i] = {r * 0.93f + 1.3f, c * 1.07f - 0.6f};
  }
  EXPECT_EQ(kernels::separable_convolve(img, taps), kernels::serial::separable_convolve(img, taps));
  EXPECT_EQ(kernels::convolve2d(img, disk), kernels::serial::convolve2d(img, disk));
  EXPECT_EQ(kernels::bilateral(img, 1.5, 0.1), kernels::serial::bilateral(img, 1.5, 0.1));
  EXPECT_EQ(kernels::remap_bilinear(img, pts), kernels::serial::remap_bilinear(img, pts));
  EXPECT_EQ(kernels::remap_bicubic(img, pts), kernels::serial::remap_bicubic(img, pts));

  Matrix a(37, 19);
  Matrix b(23, 19);
  Matrix c(37, 23);
  const CounterRng rng(8);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(i, 1);
  for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(i, 2);
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(i, 3);
  EXPECT_EQ(kernels::matmul_nt(a, b), kernels::serial::matmul_nt(a, b));
  EXPECT_EQ(kernels::matmul_tn(a, c), kernels::serial::matmul_tn(a, c));
  EXPECT_EQ(kernels::matmul_nn(c, b), kernels::serial::matmul_nn(c, b));
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelParity, ::testing::Values(1, 4));

TEST(Scene, DeterministicAndInRange) {
  const ImageTensor a = synthesize_scene(32, 48, 12);
  EXPECT_EQ(a, synthesize_scene(32, 48, 12));
  EXPECT_NE(a, synthesize_scene(32, 48, 13));
  EXPECT_TRUE(a.in_unit_range());
}

}  // namespace
}  // namespace iqa
