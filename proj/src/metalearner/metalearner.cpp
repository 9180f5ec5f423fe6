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

#include "iqa/metalearner.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>

#include "iqa/error.hpp"
#include "json.hpp"

namespace iqa {

void PredictionMatrix::validate() const {
  if (columns.empty()) throw ConfigError("prediction matrix has no predictor columns");
  for (const auto& c : columns) {
    if (c.size() != target.size()) throw ConfigError("prediction column length differs from target length");
  }
  if (target.size() < columns.size() + 2) {
    throw ConfigError("prediction matrix needs at least (columns + 2) samples");
  }
}

OlsFit ols_fit(std::span<const ScoreVector* const> columns, std::span<const double> target) {
  const Eigen::Index n = static_cast<Eigen::Index>(target.size());
  const Eigen::Index p = static_cast<Eigen::Index>(columns.size()) + 1;
  if (n <= p - 1 || n < 2) throw ConfigError("ols_fit: needs more samples than columns");
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    y(i) = target[static_cast<std::size_t>(i)];
  }
  for (Eigen::Index k = 1; k < p; ++k) {
    const ScoreVector& col = *columns[static_cast<std::size_t>(k - 1)];
    if (static_cast<Eigen::Index>(col.size()) != n) throw ConfigError("ols_fit: column length differs from target");
    for (Eigen::Index i = 0; i < n; ++i) design(i, k) = col[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw NumericError("ols_fit: singular design matrix (collinear predictors)");
  const Eigen::VectorXd beta = qr.solve(y);

  OlsFit fit;
  fit.intercept = beta(0);
  fit.coefficients.assign(beta.data() + 1, beta.data() + p);
  const Eigen::VectorXd resid = y - design * beta;
  fit.residuals.assign(resid.data(), resid.data() + n);
  const double y_mean = y.mean();
  const double sst = (y.array() - y_mean).square().sum();
  const double ssr = resid.squaredNorm();
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
  return fit;
}

OlsFit ols_fit(const std::vector<ScoreVector>& columns, std::span<const double> target) {
  std::vector<const ScoreVector*> ptrs;
  for (const auto& c : columns) ptrs.push_back(&c);
  return ols_fit(std::span<const ScoreVector* const>(ptrs), target);
}

MetaModel slr_fit(const PredictionMatrix& data, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("slr_fit: threshold must be positive");
  data.validate();
  const std::size_t k = data.columns.size();
  std::vector<std::size_t> selected;
  std::vector<bool> taken(k, false);
  MetaModel model;
  model.threshold = threshold;

  while (selected.size() < k) {
    // Candidate trial fits are independent; results land in per-candidate
    // slots and the argmax below is sequential, so the outcome does not
    // depend on scheduling.
    std::vector<std::optional<OlsFit>> trials(k);
    const int kk = static_cast<int>(k);
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < kk; ++c) {
      if (taken[c]) continue;
      std::vector<const ScoreVector*> cols;
      for (std::size_t s : selected) cols.push_back(&data.columns[s]);
      cols.push_back(&data.columns[c]);
      if (data.samples() < cols.size() + 2) continue;
      try {
        trials[c] = ols_fit(std::span<const ScoreVector* const>(cols), data.target);
      } catch (const NumericError&) {
        // Collinear with the already-selected set: the later duplicate is
        // never eligible.
      }
    }
    std::optional<std::size_t> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (!trials[c]) continue;
      const double coef = trials[c]->coefficients.back();
      if (std::fabs(coef) >= threshold && trials[c]->r_squared > best_score) {
        best = c;
        best_score = trials[c]->r_squared;
      }
    }
    if (!best) break;
    selected.push_back(*best);
    taken[*best] = true;
    model.trace.push_back({static_cast<int>(*best) + 1, trials[*best]->coefficients.back(), best_score});
  }

  if (selected.empty()) {
    model.intercept = std::accumulate(data.target.begin(), data.target.end(), 0.0) / static_cast<double>(data.samples());
    model.residuals.resize(data.samples());
    for (std::size_t i = 0; i < data.samples(); ++i) model.residuals[i] = data.target[i] - model.intercept;
    model.r_squared = 0.0;
    return model;
  }
  std::vector<const ScoreVector*> cols;
  for (std::size_t s : selected) cols.push_back(&data.columns[s]);
  const OlsFit final_fit = ols_fit(std::span<const ScoreVector* const>(cols), data.target);
  model.intercept = final_fit.intercept;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    model.terms.push_back({static_cast<int>(selected[i]) + 1, final_fit.coefficients[i]});
  }
  model.residuals = final_fit.residuals;
  model.r_squared = final_fit.r_squared;
  return model;
}

double meta_predict(const MetaModel& model, const std::map<int, double>& predictions) {
  double y = model.intercept;
  for (const MetaTerm& t : model.terms) {
    const auto it = predictions.find(t.index);
    if (it == predictions.end()) throw ConfigError("meta_predict: missing prediction for P" + std::to_string(t.index));
    y += t.coef * it->second;
  }
  return y;
}

double meta_predict_row(const MetaModel& model, std::span<const double> row) {
  double y = model.intercept;
  for (const MetaTerm& t : model.terms) {
    if (t.index < 1 || static_cast<std::size_t>(t.index) > row.size()) {
      throw ConfigError("meta_predict: missing prediction for P" + std::to_string(t.index));
    }
    y += t.coef * row[static_cast<std::size_t>(t.index - 1)];
  }
  return y;
}

double average_predict(std::span<const double> row) {
  if (row.empty()) throw ConfigError("average_predict: empty prediction row");
  return std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
}

std::string MetaModel::to_json() const {
  nlohmann::ordered_json j;
  j["intercept"] = intercept;
  j["terms"] = nlohmann::ordered_json::array();
  for (const MetaTerm& t : terms) j["terms"].push_back({{"index", t.index}, {"coef", t.coef}});
  j["r_squared"] = r_squared;
  return j.dump(2);
}

MetaModel MetaModel::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetaModel m;
    m.intercept = j.at("intercept").get<double>();
    for (const auto& t : j.at("terms")) m.terms.push_back({t.at("index").get<int>(), t.at("coef").get<double>()});
    m.r_squared = j.value("r_squared", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed meta-model JSON: ") + e.what());
  }
}

std::string MetaModel::equation(int precision) const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, intercept);
  std::string out = "Y = " + std::string(buf);
  for (const MetaTerm& t : terms) {
    std::snprintf(buf, sizeof buf, "%.*f", precision, std::fabs(t.coef));
    out += (t.coef < 0 ? " - " : " + ") + std::string(buf) + " * P" + std::to_string(t.index) + "(X)";
  }
  return out;
}

}  // namespace iqa
