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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "json.hpp"

namespace iqa {

namespace {

using Ladder = SeveritySchedule::Ladder;

Ladder scalar_ladder(std::array<double, 5> v) {
  return {{{v[0]}, {v[1]}, {v[2]}, {v[3]}, {v[4]}}};
}

}  // namespace

// Parameter meaning per model (first entry is the monotone degradation knob):
//   1  palette size                    13  saturation factor
//   2  wavelet hard threshold          14  jitter amplitude (px)
//   3  impulse density                 15  disk radius (px)
//   4  block count, block side frac    16  JPEG quality
//   5  shift (px), blend weight        17  additive offset
//   6  chroma blur sigma               18  brighten gamma
//   7  speckle variance                19  chroma gain
//   8  noise variance, spatial sigma   20  patches per 64x64, side frac
//   9  blur sigma                      21  pixel block side
//   10 unsharp amount, sigma           22  Otsu threshold count
//   11 darken gamma                    23  motion length (px), angle (deg)
//   12 S-curve strength                24/25 noise variance
SeveritySchedule SeveritySchedule::defaults() {
  SeveritySchedule s;
  s.set(1, scalar_ladder({64, 32, 16, 8, 4}));
  s.set(2, scalar_ladder({0.02, 0.05, 0.1, 0.2, 0.4}));
  s.set(3, scalar_ladder({0.01, 0.03, 0.06, 0.12, 0.24}));
  s.set(4, {{{2, 0.06}, {4, 0.08}, {6, 0.10}, {8, 0.12}, {10, 0.14}}});
  s.set(5, {{{2, 0.4}, {4, 0.55}, {6, 0.7}, {9, 0.85}, {12, 1.0}}});
  s.set(6, scalar_ladder({1, 2, 4, 6, 8}));
  s.set(7, scalar_ladder({0.005, 0.01, 0.02, 0.04, 0.08}));
  s.set(8, {{{0.001, 1.5}, {0.002, 1.5}, {0.004, 1.5}, {0.008, 1.5}, {0.016, 1.5}}});
  s.set(9, scalar_ladder({1, 2, 3, 4, 5}));
  s.set(10, {{{0.5, 1.0}, {1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}, {5.0, 1.0}}});
  s.set(11, scalar_ladder({1.2, 1.5, 2.0, 2.8, 4.0}));
  s.set(12, scalar_ladder({0.2, 0.4, 0.6, 0.8, 1.0}));
  s.set(13, scalar_ladder({0.6, 0.45, 0.3, 0.15, 0.0}));
  s.set(14, scalar_ladder({0.5, 1.0, 1.5, 2.0, 3.0}));
  s.set(15, scalar_ladder({1, 2, 3, 4, 6}));
  s.set(16, scalar_ladder({43, 36, 24, 7, 4}));
  s.set(17, scalar_ladder({0.05, 0.1, 0.15, 0.2, 0.25}));
  s.set(18, scalar_ladder({0.85, 0.7, 0.55, 0.4, 0.25}));
  s.set(19, scalar_ladder({1.5, 2, 3, 4, 6}));
  s.set(20, {{{4, 0.08}, {8, 0.08}, {12, 0.08}, {16, 0.08}, {20, 0.08}}});
  s.set(21, scalar_ladder({2, 4, 8, 16, 32}));
  s.set(22, scalar_ladder({5, 4, 3, 2, 1}));
  s.set(23, {{{3, 30}, {6, 30}, {10, 30}, {15, 30}, {21, 30}}});
  s.set(24, scalar_ladder({0.001, 0.002, 0.004, 0.008, 0.016}));
  s.set(25, scalar_ladder({0.001, 0.002, 0.004, 0.008, 0.016}));
  return s;
}

void SeveritySchedule::set(int model, Ladder ladder) { ladders_[model] = std::move(ladder); }

const std::vector<double>& SeveritySchedule::params(int model, int level) const {
  const auto it = ladders_.find(model);
  if (it == ladders_.end()) {
    throw ConfigError("severity schedule has no entry for model " + std::to_string(model));
  }
  if (level < 1 || level > kSeverityLevels) throw ConfigError("severity level out of range");
  return it->second[level - 1];
}

void SeveritySchedule::validate() const {
  for (const auto& [model, ladder] : ladders_) {
    if (model < 1 || model > kDistortionModels) {
      throw ConfigError("severity schedule model id out of range: " + std::to_string(model));
    }
    for (const auto& p : ladder) {
      if (p.empty()) throw ConfigError("empty parameter vector for model " + std::to_string(model));
    }
    const double dir = ladder[1][0] - ladder[0][0];
    for (int l = 1; l < kSeverityLevels; ++l) {
      const double step = ladder[l][0] - ladder[l - 1][0];
      if (step == 0.0 || (step > 0) != (dir > 0)) {
        throw ConfigError("degradation parameter of model " + std::to_string(model) +
                          " is not strictly monotone across levels");
      }
    }
  }
}

SeveritySchedule SeveritySchedule::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("severity schedule: ") + e.what());
  }
  if (doc.contains("schedule")) doc = doc["schedule"];
  if (!doc.is_object()) throw ConfigError("severity schedule must be a JSON object keyed by model id");
  SeveritySchedule s;
  for (const auto& [key, value] : doc.items()) {
    int model = 0;
    try {
      model = std::stoi(key);
    } catch (const std::exception&) {
      throw ConfigError("severity schedule key is not a model id: " + key);
    }
    if (!value.is_array() || value.size() != kSeverityLevels) {
      throw ConfigError("model " + key + " needs a 5-entry parameter array");
    }
    Ladder ladder;
    for (int l = 0; l < kSeverityLevels; ++l) {
      const auto& entry = value[l];
      if (entry.is_number()) {
        ladder[l] = {entry.get<double>()};
      } else if (entry.is_array() && !entry.empty() &&
                 std::all_of(entry.begin(), entry.end(), [](const auto& x) { return x.is_number(); })) {
        ladder[l] = entry.get<std::vector<double>>();
      } else {
        throw ConfigError("model " + key + ": each level must be a number or an array of numbers");
      }
    }
    s.set(model, std::move(ladder));
  }
  s.validate();
  return s;
}

SeveritySchedule SeveritySchedule::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open severity schedule: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string SeveritySchedule::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [model, ladder] : ladders_) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : ladder) {
      if (p.size() == 1) {
        arr.push_back(p[0]);
      } else {
        arr.push_back(p);
      }
    }
    doc[std::to_string(model)] = std::move(arr);
  }
  return doc.dump(2);
}

}  // namespace iqa
