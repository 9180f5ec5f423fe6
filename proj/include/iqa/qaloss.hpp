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

// Quality-aware loss:
//
//   loss = lambda1 * MSE(y, y_hat) + lambda2 * (1 - soft_srocc(y, y_hat))
//
// soft_srocc is the Pearson correlation between the softmax transforms of
// the ground truth and of the predictions, which is differentiable in the
// predictions. Gradients come from the scalar reverse-mode tape in
// autodiff.hpp.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "iqa/error.hpp"
#include "iqa/metrics.hpp"

namespace iqa {

enum class MseConvention {
  kMean,     // (1/n) * sum (y - y_hat)^2, batch-size invariant
  kHalfSum,  // (1/2) * sum (y - y_hat)^2, the literal printed form
};

struct LossConfig {
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  double temperature = 1.0;
  MseConvention mse = MseConvention::kMean;

  /// Throws ConfigError unless lambdas >= 0, lambda1 + lambda2 > 0 and
  /// temperature > 0.
  void validate() const;
};

struct LossValueAndGrad {
  double value = 0.0;
  std::vector<double> grad;  // d loss / d y_pred
};

/// Numerically stable softmax of y / temperature (max subtracted first).
std::vector<double> soft_ranks(std::span<const double> y, double temperature = 1.0);

/// Pearson correlation of soft_ranks(y_true) and soft_ranks(y_pred). Throws
/// NumericError when either soft-rank vector is (numerically) constant.
double soft_srocc(std::span<const double> y_true, std::span<const double> y_pred, double temperature = 1.0);

/// Loss value and its exact gradient with respect to y_pred. Constant
/// ground truth with lambda2 > 0 throws NumericError; constant predictions
/// score r = 0 with no rank gradient.
LossValueAndGrad qa_loss(std::span<const double> y_true, std::span<const double> y_pred, const LossConfig& cfg);

inline constexpr std::array<double, 4> kLambdaGrid = {0.25, 0.5, 0.75, 1.0};

struct GridSearchResult {
  /// table[i][j] is the loss at lambda1 = kLambdaGrid[i], lambda2 = kLambdaGrid[j].
  std::array<std::array<double, 4>, 4> table{};
  double best_lambda1 = 0.0;
  double best_lambda2 = 0.0;
  double best_value = 0.0;
};

/// Raised when the evaluation function fails on one grid cell.
class GridCellError : public Error {
 public:
  GridCellError(double lambda1, double lambda2, const std::string& cause);
  double lambda1;
  double lambda2;
};

using GridEvalFn = std::function<double(double lambda1, double lambda2)>;

/// Evaluates all 16 cells. Ties resolve to the smallest lambda1, then the
/// smallest lambda2.
GridSearchResult grid_search(const GridEvalFn& eval_fn);

/// CSV with header "lambda1,lambda2,loss", one row per cell.
std::string grid_csv(const GridSearchResult& result);

}  // namespace iqa
