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

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/kernels.hpp"
#include "iqa/regressor.hpp"

namespace iqa {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[6] = {'I', 'Q', 'A', 'M', 'L', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw DataError("model file is truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void expect_magic() {
    if (bytes_.size() < sizeof kMagic || std::memcmp(bytes_.data(), kMagic, sizeof kMagic) != 0) {
      throw DataError("not a model file (bad magic)");
    }
    pos_ = sizeof kMagic;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<double> extract_features(const ImageTensor& img, const FeatureSpec& spec) {
  if (spec.side < 1) throw ConfigError("feature side must be >= 1");
  if (img.height() < spec.side || img.width() < spec.side) {
    throw DataError("image smaller than the " + std::to_string(spec.side) + "-pixel feature patch");
  }
  std::vector<double> out;
  out.reserve(spec.width());
  const int s = spec.side;
  if (spec.mode == FeatureMode::kCenterCrop) {
    const int r0 = (img.height() - s) / 2;
    const int c0 = (img.width() - s) / 2;
    for (int r = 0; r < s; ++r) {
      for (int c = 0; c < s; ++c) {
        for (int ch = 0; ch < ImageTensor::kChannels; ++ch) out.push_back(img.at(r0 + r, c0 + c, ch));
      }
    }
    return out;
  }
  ImageTensor residual;
  if (spec.mode == FeatureMode::kLocalEnergy) {
    residual = kernels::separable_convolve(img, kernels::gaussian_taps(1.0));
    const auto src = img.data();
    auto dst = residual.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (src[i] - dst[i]) * (src[i] - dst[i]);
  }
  const ImageTensor& grid_src = spec.mode == FeatureMode::kLocalEnergy ? residual : img;
  for (int i = 0; i < s; ++i) {
    const int r_lo = i * img.height() / s;
    const int r_hi = (i + 1) * img.height() / s;
    for (int j = 0; j < s; ++j) {
      const int c_lo = j * img.width() / s;
      const int c_hi = (j + 1) * img.width() / s;
      const double area = static_cast<double>((r_hi - r_lo) * (c_hi - c_lo));
      for (int ch = 0; ch < ImageTensor::kChannels; ++ch) {
        double total = 0.0;
        for (int r = r_lo; r < r_hi; ++r) {
          for (int c = c_lo; c < c_hi; ++c) total += grid_src.at(r, c, ch);
        }
        const double mean = total / area;
        out.push_back(spec.mode == FeatureMode::kLocalEnergy ? std::log10(1e-6 + mean) + 3.0 : mean);
      }
    }
  }
  return out;
}

Matrix feature_matrix(std::span<const ImageTensor> images, const FeatureSpec& spec) {
  Matrix out(images.size(), spec.width());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::vector<double> f = extract_features(images[i], spec);
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

Matrix pool_features(const Matrix& features, int side, int factor) {
  if (factor < 1 || side < 1 || side % factor != 0) throw ConfigError("pool factor must divide the feature side");
  const std::size_t channels = ImageTensor::kChannels;
  if (features.cols() != static_cast<std::size_t>(side) * side * channels) {
    throw ConfigError("feature width does not match a " + std::to_string(side) + "-cell grid");
  }
  if (factor == 1) return features;
  const int out_side = side / factor;
  Matrix out(features.rows(), static_cast<std::size_t>(out_side) * out_side * channels);
  const double area = static_cast<double>(factor * factor);
  for (std::size_t n = 0; n < features.rows(); ++n) {
    const auto in = features.row(n);
    auto dst = out.row(n);
    for (int i = 0; i < out_side; ++i) {
      for (int j = 0; j < out_side; ++j) {
        for (std::size_t ch = 0; ch < channels; ++ch) {
          double total = 0.0;
          for (int r = i * factor; r < (i + 1) * factor; ++r) {
            for (int c = j * factor; c < (j + 1) * factor; ++c) total += in[(static_cast<std::size_t>(r) * side + c) * channels + ch];
          }
          dst[(static_cast<std::size_t>(i) * out_side + j) * channels + ch] = total / area;
        }
      }
    }
  }
  return out;
}

ClassifySet load_classify_set(const fs::path& manifest, const FeatureSpec& spec) {
  const std::vector<ManifestEntry> entries = read_manifest(manifest);
  if (entries.empty()) throw DataError("manifest is empty: " + manifest.string());
  ClassifySet set{Matrix(entries.size(), spec.width()), std::vector<int>(entries.size())};
  const fs::path base = manifest.parent_path();
  std::vector<std::exception_ptr> errors(entries.size());
  const int n = static_cast<int>(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fs::path p = entries[i].output;
      if (p.is_relative()) p = base / p;
      const std::vector<double> f = extract_features(load_image(p), spec);
      std::copy(f.begin(), f.end(), set.features.row(i).begin());
      set.classes[i] = entries[i].class_index;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return set;
}

std::vector<std::uint8_t> serialize_params(const ModelParams& params) {
  params.validate();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, params.head == Head::kClassify ? 0u : 1u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (int s : params.layer_sizes) put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    for (double v : params.weights[l].data()) put(out, v);
    for (double v : params.biases[l]) put(out, v);
  }
  return out;
}

ModelParams deserialize_params(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  in.expect_magic();
  const auto version = in.get<std::uint32_t>();
  if (version != kFormatVersion) throw DataError("unsupported model file version " + std::to_string(version));
  ModelParams p;
  const auto head = in.get<std::uint32_t>();
  if (head > 1) throw DataError("unknown head kind in model file");
  p.head = head == 0 ? Head::kClassify : Head::kRegress;
  const auto count = in.get<std::uint32_t>();
  if (count < 2 || count > 64) throw DataError("implausible layer count in model file");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto s = in.get<std::uint32_t>();
    if (s < 1 || s > (1u << 20)) throw DataError("implausible layer size in model file");
    p.layer_sizes.push_back(static_cast<int>(s));
  }
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    Matrix w(static_cast<std::size_t>(p.layer_sizes[l + 1]), static_cast<std::size_t>(p.layer_sizes[l]));
    for (double& v : w.data()) v = in.get<double>();
    std::vector<double> b(w.rows());
    for (double& v : b) v = in.get<double>();
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (!in.done()) throw DataError("trailing bytes in model file");
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("inconsistent model file: ") + e.what());
  }
  return p;
}

void save_params(const ModelParams& params, const fs::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_params(params);
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write model file: " + path.string());
}

ModelParams load_params(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_params(bytes);
}

}  // namespace iqa
