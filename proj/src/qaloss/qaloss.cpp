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

#include "iqa/qaloss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iqa/autodiff.hpp"
#include "iqa/format.hpp"

namespace iqa {

namespace {

constexpr double kPearsonEps = 1e-12;

void check_scores(std::span<const double> y, const char* what) {
  for (double v : y) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": non-finite score");
  }
}

void check_pair(std::span<const double> y_true, std::span<const double> y_pred, const char* what) {
  if (y_true.size() != y_pred.size()) throw ConfigError(std::string(what) + ": length mismatch");
  if (y_true.size() < 2) throw ConfigError(std::string(what) + ": needs at least 2 scores");
  check_scores(y_true, what);
  check_scores(y_pred, what);
}

// Tape graph of the soft-rank Pearson term. The constant side (ground truth)
// is evaluated with exactly the same arithmetic as the tape side so that
// identical inputs produce bit-identical soft-rank vectors.
// With `flat_pred_is_zero`, a constant prediction vector yields r = 0 with
// no gradient instead of an error, so training can leave a saturated state
// through the MSE term.
ad::Var soft_srocc_on_tape(std::span<const double> y_true, std::span<const ad::Var> pred, double temperature,
                           bool flat_pred_is_zero) {
  const std::vector<double> a = soft_ranks(y_true, temperature);
  const std::size_t n = pred.size();

  double max_scaled = -std::numeric_limits<double>::infinity();
  for (const ad::Var& p : pred) max_scaled = std::max(max_scaled, p.value() / temperature);
  // The shift is a constant: softmax is invariant to it, so treating it as
  // such leaves the gradient exact.
  std::vector<ad::Var> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = ad::exp(pred[i] / temperature - max_scaled);
  const ad::Var total = ad::sum(e);
  std::vector<ad::Var> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = e[i] / total;

  double a_sum = 0.0;
  for (double v : a) a_sum += v;
  const double a_mean = a_sum / static_cast<double>(n);
  const ad::Var b_mean = ad::sum(b) / static_cast<double>(n);

  double saa = 0.0;
  std::vector<ad::Var> cross(n), sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - a_mean;
    saa += da * da;
    const ad::Var db = b[i] - b_mean;
    cross[i] = db * da;
    sq[i] = db * db;
  }
  if (!(std::sqrt(saa) > kPearsonEps)) {
    throw NumericError("soft_srocc: degenerate (constant) ground-truth soft ranks");
  }
  const ad::Var sab = ad::sum(cross);
  const ad::Var sbb = ad::sum(sq);
  const ad::Var denom = ad::sqrt(sbb * saa);
  if (!(denom.value() > kPearsonEps)) {
    if (flat_pred_is_zero) return pred.front().tape()->constant(0.0);
    throw NumericError("soft_srocc: degenerate (constant) prediction soft ranks");
  }
  return sab / denom;
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("loss weights must be non-negative");
  if (!(lambda1 + lambda2 > 0.0)) throw ConfigError("loss weights must not both be zero");
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be positive");
}

std::vector<double> soft_ranks(std::span<const double> y, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("soft_ranks: temperature must be positive");
  if (y.empty()) throw ConfigError("soft_ranks: empty input");
  check_scores(y, "soft_ranks");
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (double v : y) max_scaled = std::max(max_scaled, v / temperature);
  std::vector<double> e(y.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    e[i] = std::exp(y[i] / temperature - max_scaled);
    total += e[i];
  }
  for (double& v : e) v = v / total;
  return e;
}

double soft_srocc(std::span<const double> y_true, std::span<const double> y_pred, double temperature) {
  check_pair(y_true, y_pred, "soft_srocc");
  if (!(temperature > 0.0)) throw ConfigError("soft_srocc: temperature must be positive");
  ad::Tape tape;
  std::vector<ad::Var> pred;
  pred.reserve(y_pred.size());
  for (double v : y_pred) pred.push_back(tape.variable(v));
  return soft_srocc_on_tape(y_true, pred, temperature, false).value();
}

LossValueAndGrad qa_loss(std::span<const double> y_true, std::span<const double> y_pred, const LossConfig& cfg) {
  cfg.validate();
  check_pair(y_true, y_pred, "qa_loss");
  const std::size_t n = y_pred.size();
  ad::Tape tape;
  std::vector<ad::Var> pred;
  pred.reserve(n);
  for (double v : y_pred) pred.push_back(tape.variable(v));

  std::vector<ad::Var> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ad::Var d = pred[i] - y_true[i];
    sq[i] = d * d;
  }
  const ad::Var mse = cfg.mse == MseConvention::kMean ? ad::mean(sq) : ad::sum(sq) * 0.5;

  ad::Var loss = mse * cfg.lambda1;
  if (cfg.lambda2 > 0.0) {
    const ad::Var rank_term = 1.0 - soft_srocc_on_tape(y_true, pred, cfg.temperature, true);
    loss = loss + rank_term * cfg.lambda2;
  }

  const std::vector<double> adjoint = tape.backward(loss);
  LossValueAndGrad out;
  // Rounding can push 1 - r a few ulps below zero at a perfect fit.
  out.value = std::max(0.0, loss.value());
  out.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.grad[i] = adjoint[pred[i].index()];
  if (!std::isfinite(out.value)) throw NumericError("qa_loss: non-finite loss value");
  return out;
}

GridCellError::GridCellError(double l1, double l2, const std::string& cause)
    : Error("grid search failed at lambda1=" + std::to_string(l1) + ", lambda2=" + std::to_string(l2) + ": " + cause),
      lambda1(l1),
      lambda2(l2) {}

GridSearchResult grid_search(const GridEvalFn& eval_fn) {
  GridSearchResult result;
  bool have_best = false;
  for (std::size_t i = 0; i < kLambdaGrid.size(); ++i) {
    for (std::size_t j = 0; j < kLambdaGrid.size(); ++j) {
      const double l1 = kLambdaGrid[i];
      const double l2 = kLambdaGrid[j];
      double v = 0.0;
      try {
        v = eval_fn(l1, l2);
      } catch (const std::exception& e) {
        throw GridCellError(l1, l2, e.what());
      }
      if (!std::isfinite(v)) throw GridCellError(l1, l2, "non-finite loss value");
      result.table[i][j] = v;
      if (!have_best || v < result.best_value) {
        have_best = true;
        result.best_value = v;
        result.best_lambda1 = l1;
        result.best_lambda2 = l2;
      }
    }
  }
  return result;
}

std::string grid_csv(const GridSearchResult& result) {
  std::ostringstream out;
  out << "lambda1,lambda2,loss\n";
  for (std::size_t i = 0; i < kLambdaGrid.size(); ++i) {
    for (std::size_t j = 0; j < kLambdaGrid.size(); ++j) {
      out << shortest(kLambdaGrid[i]) << ',' << shortest(kLambdaGrid[j]) << ',' << shortest(result.table[i][j]) << '\n';
    }
  }
  return out.str();
}

}  // namespace iqa
