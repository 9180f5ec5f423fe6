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

#include <span>
#include <vector>

namespace iqa {

using ScoreVector = std::vector<double>;

struct MosRecord {
  double mos = 0.0;
  double mos_min = 0.0;
  double mos_max = 1.0;
};

/// (mos - mos_min) / (mos_max - mos_min): 0 is the worst quality, 1 the best.
/// Throws ConfigError for a degenerate range or mos outside [min, max].
double scale_mos(const MosRecord& rec);

/// Pearson linear correlation. Throws ConfigError on length mismatch or
/// n < 2, NumericError when either input has zero variance.
double plcc(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation: Pearson correlation of average (fractional)
/// ranks. Throws NumericError when either input is all-tied.
double srocc(std::span<const double> x, std::span<const double> y);

/// Root mean squared difference. Throws ConfigError on length mismatch or
/// empty input.
double rmse(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace iqa
