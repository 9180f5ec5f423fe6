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

#include "iqa/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "iqa/error.hpp"
#include "iqa/kernels.hpp"
#include "iqa/rng.hpp"

namespace iqa {

ImageTensor::ImageTensor(int height, int width) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw ConfigError("image dimensions must be >= 1");
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, 0.0f);
}

ImageTensor::ImageTensor(int height, int width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 1 || width < 1) throw ConfigError("image dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(height) * width * kChannels) {
    throw ConfigError("image data length does not match height * width * 3");
  }
}

float ImageTensor::clamped(int row, int col, int ch) const {
  row = std::clamp(row, 0, height_ - 1);
  col = std::clamp(col, 0, width_ - 1);
  return data_[index(row, col, ch)];
}

void ImageTensor::clamp_unit() {
  for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

bool ImageTensor::in_unit_range() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

std::uint8_t quantize_channel(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(static_cast<double>(c) * 255.0));
}

ImageTensor from_rgb8(const Rgb8Image& img) {
  std::vector<float> data(img.bytes.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(img.bytes[i] / 255.0);
  return ImageTensor(img.height, img.width, std::move(data));
}

Rgb8Image to_rgb8(const ImageTensor& img) {
  Rgb8Image out{img.height(), img.width(), {}};
  out.bytes.reserve(img.data().size());
  for (float v : img.data()) out.bytes.push_back(quantize_channel(v));
  return out;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

Rgb8Image decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DataError("cannot decode PNG " + name + ": " + image.message);
  }
  // Reject anything that is not plain 8-bit colour without alpha.
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool linear = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  if (!color || alpha || linear) {
    png_image_free(&image);
    throw DataError("PNG " + name + " is not 8-bit RGB");
  }
  image.format = PNG_FORMAT_RGB;
  Rgb8Image out{static_cast<int>(image.height), static_cast<int>(image.width), {}};
  out.bytes.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.bytes.data(), 0, nullptr)) {
    throw DataError("cannot decode PNG " + name + ": " + image.message);
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Rgb8Image& img, const std::string& name) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  image.flags = PNG_IMAGE_FLAG_FAST;
  // One pass into a worst-case buffer; probing the size first would
  // compress twice.
  std::vector<std::uint8_t> out(PNG_IMAGE_PNG_SIZE_MAX(image));
  png_alloc_size_t size = out.size();
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.bytes.data(), 0, nullptr)) {
    throw DataError("cannot encode PNG " + name + ": " + image.message);
  }
  out.resize(size);
  return out;
}

// Reads one whitespace/comment separated header token of a PNM file.
std::string pnm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') tok.push_back(static_cast<char>(bytes[pos++]));
  return tok;
}

int pnm_int(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  const std::string tok = pnm_token(bytes, pos);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw DataError("malformed PPM header");
  }
  return std::stoi(tok);
}

}  // namespace

Rgb8Image decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const std::string magic = pnm_token(bytes, pos);
  if (magic == "P5" || magic == "P2") throw DataError("PPM is not RGB (grayscale PGM)");
  if (magic != "P6") throw DataError("unsupported image format (expected binary PPM P6)");
  const int width = pnm_int(bytes, pos);
  const int height = pnm_int(bytes, pos);
  const int maxval = pnm_int(bytes, pos);
  if (width < 1 || height < 1) throw DataError("PPM dimensions must be positive");
  if (maxval != 255) throw DataError("PPM must be 8-bit (maxval 255)");
  ++pos;  // single whitespace byte before raster
  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() < pos + need) throw DataError("PPM raster truncated");
  Rgb8Image out{height, width, {}};
  out.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return out;
}

std::vector<std::uint8_t> encode_ppm(const Rgb8Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.bytes.begin(), img.bytes.end());
  return out;
}

ImageTensor load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return from_rgb8(decode_png(bytes, path.string()));
  if (bytes.size() >= 2 && bytes[0] == 'P') return from_rgb8(decode_ppm(bytes));
  throw DataError("unsupported image format: " + path.string());
}

void save_image(const ImageTensor& img, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const Rgb8Image rgb = to_rgb8(img);
  std::vector<std::uint8_t> bytes;
  if (ext == ".png") {
    bytes = encode_png(rgb, path.string());
  } else if (ext == ".ppm") {
    bytes = encode_ppm(rgb);
  } else {
    throw ConfigError("unsupported output extension: " + path.string());
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

ImageTensor crop(const ImageTensor& img, const CropSpec& spec, std::uint64_t seed) {
  if (spec.size < 1) throw ConfigError("crop size must be >= 1");
  if (spec.size > img.height() || spec.size > img.width()) {
    throw ConfigError("crop of " + std::to_string(spec.size) + " does not fit a " +
                      std::to_string(img.height()) + "x" + std::to_string(img.width()) + " image");
  }
  CropOrigin origin;
  if (spec.origin) {
    origin = *spec.origin;
    if (origin.row < 0 || origin.col < 0 || origin.row + spec.size > img.height() ||
        origin.col + spec.size > img.width()) {
      throw ConfigError("crop origin places the patch outside the image");
    }
  } else {
    Rng rng(seed);
    origin.row = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(img.height() - spec.size + 1)));
    origin.col = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(img.width() - spec.size + 1)));
  }
  ImageTensor out(spec.size, spec.size);
  for (int r = 0; r < spec.size; ++r) {
    for (int c = 0; c < spec.size; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = img.at(origin.row + r, origin.col + c, ch);
    }
  }
  return out;
}

ImageTensor translate(const ImageTensor& img, int dy, int dx) {
  ImageTensor out(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = img.clamped(r - dy, c - dx, ch);
    }
  }
  return out;
}

namespace {

// Exact values at multiples of 90 degrees so quarter turns are permutations.
std::pair<double, double> cos_sin_degrees(double degrees) {
  const double turns = degrees / 90.0;
  if (turns == std::round(turns)) {
    const long q = ((static_cast<long>(std::round(turns)) % 4) + 4) % 4;
    static constexpr double kCos[4] = {1, 0, -1, 0};
    static constexpr double kSin[4] = {0, 1, 0, -1};
    return {kCos[q], kSin[q]};
  }
  const double rad = degrees * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

}  // namespace

ImageTensor rotate(const ImageTensor& img, double degrees) {
  const auto [cs, sn] = cos_sin_degrees(degrees);
  const double cy = (img.height() - 1) / 2.0;
  const double cx = (img.width() - 1) / 2.0;
  std::vector<kernels::SamplePoint> points(img.pixel_count());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const double y = r - cy;
      const double x = c - cx;
      points[static_cast<std::size_t>(r) * img.width() + c] = {
          static_cast<float>(sn * x + cs * y + cy), static_cast<float>(cs * x - sn * y + cx)};
    }
  }
  ImageTensor out = kernels::remap_bilinear(img, points);
  out.clamp_unit();
  return out;
}

ImageTensor augment(const ImageTensor& img, const AugmentOp& op, const AugmentBounds& bounds) {
  switch (op.kind) {
    case AugmentKind::kTranslate: {
      const double limit = bounds.max_translate_fraction * std::min(img.height(), img.width());
      if (std::fabs(op.magnitude) > limit) throw ConfigError("translate magnitude out of bounds");
      Rng rng(op.seed);
      const double theta = uniform_between(rng, 0.0, 2.0 * std::numbers::pi);
      const int dy = static_cast<int>(std::lround(op.magnitude * std::sin(theta)));
      const int dx = static_cast<int>(std::lround(op.magnitude * std::cos(theta)));
      return translate(img, dy, dx);
    }
    case AugmentKind::kRotate:
      if (std::fabs(op.magnitude) > bounds.max_rotate_degrees) throw ConfigError("rotate magnitude out of bounds");
      return rotate(img, op.magnitude);
    case AugmentKind::kRandomCrop: {
      const double side = std::round(op.magnitude);
      if (side != op.magnitude || side < 1 || side > std::min(img.height(), img.width())) {
        throw ConfigError("random crop side out of bounds");
      }
      return crop(img, CropSpec{static_cast<int>(side), std::nullopt}, op.seed);
    }
  }
  throw ConfigError("unknown augmentation kind");
}

ImageTensor synthesize_scene(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  ImageTensor img(height, width);
  // Background: two-colour linear gradient in a random direction.
  float base0[3], base1[3];
  for (int ch = 0; ch < 3; ++ch) {
    base0[ch] = static_cast<float>(uniform_between(rng, 0.15, 0.85));
    base1[ch] = static_cast<float>(uniform_between(rng, 0.15, 0.85));
  }
  const double theta = uniform_between(rng, 0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(theta) / width;
  const double gy = std::sin(theta) / height;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double t = std::clamp(0.5 + (c - width / 2.0) * gx + (r - height / 2.0) * gy, 0.0, 1.0);
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(base0[ch] + t * (base1[ch] - base0[ch]));
    }
  }
  // Flat shapes: discs and rectangles with distinct colours.
  const int shapes = 3 + static_cast<int>(uniform_below(rng, 4));
  for (int s = 0; s < shapes; ++s) {
    float color[3];
    for (float& v : color) v = static_cast<float>(uniform_between(rng, 0.05, 0.95));
    const bool disc = uniform01(rng) < 0.5;
    const double cr = uniform_between(rng, 0.0, height);
    const double cc = uniform_between(rng, 0.0, width);
    const double rad = uniform_between(rng, 0.08, 0.25) * std::min(height, width);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double dy = r - cr;
        const double dx = c - cc;
        const bool inside = disc ? dx * dx + dy * dy <= rad * rad : std::fabs(dx) <= rad && std::fabs(dy) <= 0.6 * rad;
        if (inside) {
          for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = color[ch];
        }
      }
    }
  }
  // Mild sinusoidal texture so blur and noise have structure to act on.
  const double fy = uniform_between(rng, 0.15, 0.6);
  const double fx = uniform_between(rng, 0.15, 0.6);
  const double amp = uniform_between(rng, 0.02, 0.06);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const float t = static_cast<float>(amp * std::sin(fy * r) * std::sin(fx * c));
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) += t;
    }
  }
  img.clamp_unit();
  return img;
}

}  // namespace iqa
