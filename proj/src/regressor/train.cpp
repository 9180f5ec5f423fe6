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
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "iqa/error.hpp"
#include "iqa/format.hpp"
#include "iqa/regressor.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace {

constexpr std::uint64_t kSplitStream = 0x5b1;
constexpr std::uint64_t kEpochStream = 0xe90c;

class Adam {
 public:
  Adam(const ModelParams& p, const TrainConfig& cfg) : cfg_(cfg) {
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      m_.emplace_back(p.weights[l].size() + p.biases[l].size(), 0.0);
      v_.emplace_back(m_.back().size(), 0.0);
    }
  }

  void step(ModelParams& p, const Gradients& g, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      auto w = p.weights[l].data();
      const auto gw = g.weights[l].data();
      std::size_t k = 0;
      for (std::size_t i = 0; i < w.size(); ++i, ++k) update(w[i], gw[i], l, k, lr, c1, c2);
      auto& b = p.biases[l];
      for (std::size_t i = 0; i < b.size(); ++i, ++k) update(b[i], g.biases[l][i], l, k, lr, c1, c2);
    }
  }

 private:
  void update(double& x, double g, std::size_t l, std::size_t k, double lr, double c1, double c2) {
    double& m = m_[l][k];
    double& v = v_[l][k];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
    x -= lr * (m / c1) / (std::sqrt(v / c2) + cfg_.epsilon);
  }

  TrainConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto row = src.row(idx[i]);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& src, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(src[i]);
  return out;
}

// Batch boundaries over `n` samples; a trailing batch of one sample joins
// the previous batch so every regression batch has at least two rows.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t size) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t start = 0; start < n; start += size) out.emplace_back(start, std::min(n, start + size));
  if (out.size() > 1 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

// Loss on a subset of samples; fills grad when non-null.
using SubsetLoss = std::function<double(const ModelParams&, std::span<const std::size_t>, Gradients*)>;

TrainResult train_loop(const ModelParams& init, std::size_t n, std::size_t min_part, const SubsetLoss& loss_fn,
                       const TrainConfig& cfg) {
  cfg.validate();
  ValidationSplit parts = validation_split(n, cfg);
  if (parts.validation.size() < min_part || parts.train.size() < min_part) {
    throw ConfigError("training set of " + std::to_string(n) + " samples is too small for a validation split");
  }
  std::vector<std::size_t>& train = parts.train;
  const std::vector<std::size_t>& val = parts.validation;

  TrainResult result{init, {}};
  ModelParams params = init;
  Adam adam(params, cfg);
  double best = std::numeric_limits<double>::infinity();
  Gradients grad;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(combine_seed(cfg.seed, combine_seed(kEpochStream, static_cast<std::uint64_t>(epoch))));
    shuffle_in_place(train, rng);
    const double lr = cfg.learning_rate(epoch);
    double total = 0.0;
    for (const auto& [lo, hi] : batch_ranges(train.size(), static_cast<std::size_t>(cfg.mini_batch))) {
      const std::span<const std::size_t> idx(train.data() + lo, hi - lo);
      const double l = loss_fn(params, idx, &grad);
      if (!std::isfinite(l)) throw NumericError("training loss diverged at epoch " + std::to_string(epoch));
      total += l * static_cast<double>(idx.size());
      adam.step(params, grad, lr);
    }
    const double val_loss = loss_fn(params, val, nullptr);
    if (!std::isfinite(val_loss)) throw NumericError("validation loss diverged at epoch " + std::to_string(epoch));
    result.report.epochs.push_back({epoch, total / static_cast<double>(train.size()), val_loss});
    if (val_loss < best) {
      best = val_loss;
      result.report.best_epoch = epoch;
      result.report.best_val_loss = val_loss;
      result.params = params;
    } else if (epoch - result.report.best_epoch >= cfg.patience) {
      result.report.stop = StopReason::kEarlyStop;
      return result;
    }
  }
  result.report.stop = StopReason::kMaxEpochs;
  return result;
}

}  // namespace

ValidationSplit validation_split(std::size_t n, const TrainConfig& cfg) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(combine_seed(cfg.split_seed.value_or(cfg.seed), kSplitStream));
  shuffle_in_place(order, rng);
  const auto n_val = std::min(n, static_cast<std::size_t>(std::lround(static_cast<double>(n) * cfg.validation_fraction)));
  const auto cut = order.end() - static_cast<std::ptrdiff_t>(n_val);
  return {std::vector<std::size_t>(order.begin(), cut), std::vector<std::size_t>(cut, order.end())};
}

void TrainConfig::validate() const {
  if (mini_batch < 1) throw ConfigError("mini_batch must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(initial_lr > 0.0)) throw ConfigError("initial learning rate must be positive");
  if (!(lr_drop_factor > 0.0)) throw ConfigError("learning-rate drop factor must be positive");
  if (lr_drop_period < 1) throw ConfigError("learning-rate drop period must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
}

double TrainConfig::learning_rate(int epoch) const {
  return initial_lr * std::pow(lr_drop_factor, static_cast<double>((epoch - 1) / lr_drop_period));
}

std::string TrainReport::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (const EpochRecord& e : epochs) out << e.epoch << ',' << shortest(e.train_loss) << ',' << shortest(e.val_loss) << '\n';
  return out.str();
}

int TrainReport::epochs_to_reach(double target) const {
  for (const EpochRecord& e : epochs) {
    if (e.val_loss <= target) return e.epoch;
  }
  return -1;
}

TrainResult pretrain_classify(const ModelParams& init, const ClassifySet& data, const TrainConfig& cfg) {
  init.validate();
  if (init.head != Head::kClassify) throw ConfigError("pretrain_classify needs a classification head");
  if (data.features.cols() != init.input_width()) throw ConfigError("feature width does not match input layer");
  if (data.classes.size() != data.features.rows()) throw ConfigError("class count does not match feature rows");
  const std::set<int> distinct(data.classes.begin(), data.classes.end());
  if (distinct.size() < 2) throw DataError("pre-training corpus spans fewer than 2 classes");
  const SubsetLoss fn = [&](const ModelParams& p, std::span<const std::size_t> idx, Gradients* g) {
    const Matrix x = gather_rows(data.features, idx);
    const std::vector<int> y = gather(data.classes, idx);
    return classify_loss(p, x, y, g);
  };
  return train_loop(init, data.features.rows(), 1, fn, cfg);
}

TrainResult finetune_regress(const ModelParams& init, const RegressSet& data, const LossConfig& loss,
                             const TrainConfig& cfg) {
  init.validate();
  loss.validate();
  if (init.head != Head::kRegress) throw ConfigError("finetune_regress needs a regression head");
  if (cfg.mini_batch < 2) throw ConfigError("regression needs mini_batch >= 2 for the rank term");
  if (data.features.cols() != init.input_width()) throw ConfigError("feature width does not match input layer");
  if (data.labels.size() != data.features.rows()) throw ConfigError("label count does not match feature rows");
  for (double y : data.labels) {
    if (!(y >= 0.0 && y <= 1.0)) throw DataError("regression labels must lie in [0, 1]");
  }
  const SubsetLoss fn = [&](const ModelParams& p, std::span<const std::size_t> idx, Gradients* g) {
    const Matrix x = gather_rows(data.features, idx);
    const ScoreVector y = gather(data.labels, idx);
    return regress_loss(p, x, y, loss, g);
  };
  return train_loop(init, data.features.rows(), 2, fn, cfg);
}

}  // namespace iqa
