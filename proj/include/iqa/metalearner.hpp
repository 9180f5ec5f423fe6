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

// Stepwise linear regression meta-learner over base-predictor outputs.
//
//   Y = b0 + sum_i b_i * P_i(X) + e
//
// Forward selection: each round fits OLS on (selected + candidate) for every
// remaining candidate, keeps candidates whose own coefficient satisfies
// |b| >= threshold, and accepts the one with the highest training R^2.
// Selection stops when no candidate qualifies; the final model is refit on
// the selected predictors.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "iqa/metrics.hpp"

namespace iqa {

/// Base-predictor outputs. Predictor serials are 1-based: column k holds
/// P_{k+1}(X) for every sample.
struct PredictionMatrix {
  std::vector<ScoreVector> columns;
  ScoreVector target;

  std::size_t samples() const { return target.size(); }
  /// Throws ConfigError unless columns are non-empty, lengths agree and
  /// samples >= columns + 2.
  void validate() const;
};

struct OlsFit {
  double intercept = 0.0;
  std::vector<double> coefficients;  // one per input column
  double r_squared = 0.0;
  ScoreVector residuals;  // target - fitted
};

/// Least squares with intercept via column-pivoted QR. Throws NumericError
/// when the design matrix is rank deficient, ConfigError when there are not
/// more samples than coefficients.
OlsFit ols_fit(std::span<const ScoreVector* const> columns, std::span<const double> target);
OlsFit ols_fit(const std::vector<ScoreVector>& columns, std::span<const double> target);

struct MetaTerm {
  int index = 0;  // predictor serial (1-based)
  double coef = 0.0;

  friend bool operator==(const MetaTerm&, const MetaTerm&) = default;
};

/// One accepted selection round, recorded for auditing the fit.
struct SelectionRound {
  int index = 0;
  double coef_at_acceptance = 0.0;
  double r_squared = 0.0;
};

struct MetaModel {
  double intercept = 0.0;
  std::vector<MetaTerm> terms;  // in selection order
  ScoreVector residuals;
  double r_squared = 0.0;
  double threshold = 0.05;
  std::vector<SelectionRound> trace;

  /// {"intercept": b0, "terms": [{"index": i, "coef": b}], "r_squared": r2}
  std::string to_json() const;
  static MetaModel from_json(const std::string& text);
  /// "Y = 0.0500 + 0.4000 * P7(X) + ..." with terms in selection order.
  std::string equation(int precision = 4) const;
};

MetaModel slr_fit(const PredictionMatrix& data, double threshold = 0.05);

/// b0 + sum b_i * P_i(X). `predictions` maps predictor serial to value;
/// throws ConfigError if a selected serial is missing.
double meta_predict(const MetaModel& model, const std::map<int, double>& predictions);
/// Same, reading P_i from row[i - 1] of a full prediction row.
double meta_predict_row(const MetaModel& model, std::span<const double> row);

/// Uniform average of all base predictions, the meta-learner ablation.
double average_predict(std::span<const double> row);

}  // namespace iqa
