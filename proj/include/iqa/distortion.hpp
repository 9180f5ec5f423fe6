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

// Synthetic distortion bank: 25 distortion models at 5 severity levels,
// with deterministic seeding and the "model-level" pseudo-labels used for
// distortion-classification pre-training.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "iqa/image.hpp"

namespace iqa {

inline constexpr int kDistortionModels = 25;
inline constexpr int kSeverityLevels = 5;
inline constexpr int kDistortionClasses = kDistortionModels * kSeverityLevels;

enum class DistortionModel : int {
  kColorQuantization = 1,
  kJpeg2000 = 2,
  kImpulseNoise = 3,
  kColorBlock = 4,
  kColorShift = 5,
  kColorDiffusion = 6,
  kMultiplicativeNoise = 7,
  kDenoise = 8,
  kGaussianBlur = 9,
  kHighSharpen = 10,
  kDarken = 11,
  kContrastChange = 12,
  kHsvSaturation = 13,
  kJitter = 14,
  kLensBlur = 15,
  kJpeg = 16,
  kMeanShift = 17,
  kBrighten = 18,
  kLabSaturation = 19,
  kNonEccentricityPatch = 20,
  kPixelate = 21,
  kQuantization = 22,
  kMotionBlur = 23,
  kYCbCrWhiteNoise = 24,
  kWhiteNoise = 25,
};

std::string_view distortion_name(int model);

struct DistortionSpec {
  int model = 1;  // 1..25
  int level = 1;  // 1..5
  std::uint64_t seed = 0;
};

/// Throws ConfigError unless 1 <= model <= 25 and 1 <= level <= 5.
void validate(const DistortionSpec& spec);

struct PseudoLabel {
  std::string text;  // "model-level", e.g. "25-5"
  int class_index = 0;  // (model - 1) * 5 + (level - 1)

  friend bool operator==(const PseudoLabel&, const PseudoLabel&) = default;
};

PseudoLabel pseudo_label(const DistortionSpec& spec);
/// Inverse of the class-index half of pseudo_label; seed is left at 0.
DistortionSpec spec_from_class(int class_index);

/// Per (model, level) parameter vectors. The first entry of each vector is
/// the model's degradation parameter and must be strictly monotone across
/// levels 1..5; further entries are auxiliary settings.
class SeveritySchedule {
 public:
  using Ladder = std::array<std::vector<double>, kSeverityLevels>;

  /// Documented default ladders (see config/severity_schedule.json).
  static SeveritySchedule defaults();
  /// Parses the JSON config: {"<model id>": [p1, p2, p3, p4, p5], ...} where
  /// each p is a number or an array of numbers. Missing models are allowed;
  /// apply_distortion fails for them.
  static SeveritySchedule from_json(std::string_view text);
  static SeveritySchedule load(const std::filesystem::path& path);

  std::string to_json() const;

  bool has(int model) const { return ladders_.contains(model); }
  const std::vector<double>& params(int model, int level) const;
  void set(int model, Ladder ladder);

  /// Throws ConfigError if any ladder is empty or not strictly monotone.
  void validate() const;

 private:
  std::map<int, Ladder> ladders_;
};

ImageTensor apply_distortion(const ImageTensor& img, const DistortionSpec& spec,
                             const SeveritySchedule& schedule);

/// Per-image seed for corpus generation: hash(seed, source path, model,
/// level). Independent of enumeration order.
std::uint64_t corpus_item_seed(std::uint64_t seed, std::string_view source, int model, int level);

struct ManifestEntry {
  std::string source;
  std::string output;  // file name relative to the manifest directory
  int model = 0;
  int level = 0;
  std::string label;
  int class_index = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// One JSON object per line: {source, output, model, level, label,
/// class_index, seed}.
std::string manifest_line(const ManifestEntry& entry);
ManifestEntry parse_manifest_line(std::string_view line);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct CorpusRequest {
  std::filesystem::path pristine_dir;
  std::filesystem::path out_dir;
  std::vector<int> models;  // empty means all 25
  std::vector<int> levels;  // empty means all 5
  std::uint64_t seed = 0;
  std::string format = "png";
};

/// Writes one distorted image per (pristine, model, level) plus
/// out_dir/manifest.jsonl. Images are distorted in parallel; the manifest is
/// written afterwards in sorted (source, model, level) order.
std::vector<ManifestEntry> generate_corpus(const CorpusRequest& request, const SeveritySchedule& schedule);

}  // namespace iqa
