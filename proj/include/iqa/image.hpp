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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace iqa {

/// Row-major H x W x 3 image with channel values in [0, 1].
class ImageTensor {
 public:
  static constexpr int kChannels = 3;

  ImageTensor() = default;
  /// Zero-filled image. Throws ConfigError unless height, width >= 1.
  ImageTensor(int height, int width);
  /// Takes ownership of `data`; its length must be height * width * 3.
  ImageTensor(int height, int width, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  float& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  float at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

  /// Reads with coordinates clamped into the image (edge replication).
  float clamped(int row, int col, int ch) const;

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  /// Clamps every channel into [0, 1].
  void clamp_unit();
  /// True when every channel lies in [0, 1] and is finite.
  bool in_unit_range() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// 8-bit interleaved RGB buffer, the on-disk representation.
struct Rgb8Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bytes;
};

/// c -> c / 255.
ImageTensor from_rgb8(const Rgb8Image& img);
/// v -> round(v * 255), half away from zero, after clamping to [0, 1].
Rgb8Image to_rgb8(const ImageTensor& img);
std::uint8_t quantize_channel(float v);

/// PNG or binary PPM (P6, maxval 255), chosen by file contents.
ImageTensor load_image(const std::filesystem::path& path);
/// Format chosen by extension: .png or .ppm.
void save_image(const ImageTensor& img, const std::filesystem::path& path);

/// In-memory codecs, used by the loaders and by tests.
Rgb8Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Rgb8Image& img);

struct CropOrigin {
  int row = 0;
  int col = 0;
};

/// Square crop; an empty origin means uniform random over valid offsets.
struct CropSpec {
  int size = 64;
  std::optional<CropOrigin> origin;
};

ImageTensor crop(const ImageTensor& img, const CropSpec& spec, std::uint64_t seed);

enum class AugmentKind { kTranslate, kRotate, kRandomCrop };

struct AugmentOp {
  AugmentKind kind = AugmentKind::kTranslate;
  /// Pixels for translate, degrees for rotate, side length for crop.
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

struct AugmentBounds {
  double max_rotate_degrees = 15.0;
  /// Fraction of min(height, width).
  double max_translate_fraction = 0.10;
};

/// Quality-preserving augmentation. Translate and rotate keep the input
/// dimensions and fill revealed borders by edge replication; random crop
/// returns a magnitude-sized patch.
ImageTensor augment(const ImageTensor& img, const AugmentOp& op,
                    const AugmentBounds& bounds = {});

/// Integer translation with edge replication: out(r, c) = in(r - dy, c - dx).
ImageTensor translate(const ImageTensor& img, int dy, int dx);
/// Counter-clockwise rotation about the image center, bilinear sampling with
/// edge replication. Multiples of 90 degrees are exact pixel permutations on
/// square images.
ImageTensor rotate(const ImageTensor& img, double degrees);

/// Procedural test scene: smooth gradients, a few flat shapes and mild
/// texture. Used to build pristine corpora where no photographs are at hand.
ImageTensor synthesize_scene(int height, int width, std::uint64_t seed);

}  // namespace iqa
