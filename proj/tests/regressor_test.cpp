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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "iqa/error.hpp"
#include "iqa/regressor.hpp"
#include "iqa/rng.hpp"

namespace iqa {
namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = uniform_between(rng, -1.0, 1.0);
  return m;
}

// Visits every parameter of `p` in a fixed order.
template <typename F>
void for_each_param(ModelParams& p, Gradients& g, F&& f) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    for (std::size_t i = 0; i < p.weights[l].data().size(); ++i) f(p.weights[l].data()[i], g.weights[l].data()[i]);
    for (std::size_t i = 0; i < p.biases[l].size(); ++i) f(p.biases[l][i], g.biases[l][i]);
  }
}

template <typename Loss>
double worst_fd_error(ModelParams p, Loss&& loss) {
  Gradients g;
  loss(p, &g);
  double worst = 0.0;
  for_each_param(p, g, [&](double& w, double analytic) {
    const double keep = w;
    w = keep + 1e-5;
    const double up = loss(p, nullptr);
    w = keep - 1e-5;
    const double down = loss(p, nullptr);
    w = keep;
    const double fd = (up - down) / 2e-5;
    const double scale = std::max(std::abs(fd), std::abs(analytic));
    worst = std::max(worst, scale < 1e-8 ? std::abs(fd - analytic) : std::abs(fd - analytic) / scale);
  });
  return worst;
}

TEST(Init, ShapesAndDeterminism) {
  const ModelParams r = init_params({12, 6, 4}, Head::kRegress, 3);
  EXPECT_EQ(r.layer_sizes, (std::vector<int>{12, 6, 4, 1}));
  EXPECT_EQ(r.output_width(), 1u);
  EXPECT_EQ(r.parameter_count(), 12u * 6 + 6 + 6 * 4 + 4 + 4 + 1);
  EXPECT_EQ(init_params({12, 6, 4}, Head::kRegress, 3), r);
  EXPECT_NE(init_params({12, 6, 4}, Head::kRegress, 4), r);
  const ModelParams c = init_params({12, 6}, Head::kClassify, 3);
  EXPECT_EQ(c.output_width(), 125u);
  EXPECT_EQ(c.weights.back().rows(), 125u);
  EXPECT_THROW(init_params({}, Head::kRegress, 0), ConfigError);
  EXPECT_THROW(init_params({4, 0}, Head::kRegress, 0), ConfigError);
}

TEST(Forward, ZeroWeightsGiveSigmoidOfBias) {
  ModelParams p = init_params({5, 3}, Head::kRegress, 1);
  for (auto& w : p.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
  p.biases.back()[0] = 0.7;
  Rng rng(1);
  for (double y : predict(p, random_matrix(rng, 6, 5))) EXPECT_DOUBLE_EQ(y, 1.0 / (1.0 + std::exp(-0.7)));
}

TEST(Forward, ProbabilitiesAndRange) {
  Rng rng(2);
  const Matrix x = random_matrix(rng, 20, 8);
  const Matrix probs = forward(init_params({8, 10}, Head::kClassify, 2), x);
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const auto row = probs.row(r);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  }
  ModelParams p = init_params({8, 10}, Head::kRegress, 2);
  for (auto& w : p.weights) {
    for (double& v : w.data()) v *= 50.0;
  }
  for (double y : predict(p, x)) {
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
  }
  EXPECT_THROW(forward(p, random_matrix(rng, 2, 7)), ConfigError);
}

TEST(Forward, BatchIndependence) {
  Rng rng(3);
  const Matrix x = random_matrix(rng, 9, 6);
  const ModelParams p = init_params({6, 5, 4}, Head::kRegress, 3);
  const ScoreVector all = predict(p, x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    Matrix one(1, 6);
    std::copy(x.row(r).begin(), x.row(r).end(), one.row(0).begin());
    EXPECT_EQ(predict(p, one)[0], all[r]);
  }
}

TEST(Gradients, RegressionMatchesFiniteDifferences) {
  Rng rng(4);
  const ModelParams p = init_params({3, 4, 2}, Head::kRegress, 4);
  ASSERT_LE(p.parameter_count(), 50u);
  const Matrix x = random_matrix(rng, 6, 3);
  ScoreVector y(6);
  for (double& v : y) v = uniform01(rng);
  for (const LossConfig& cfg : {LossConfig{1.0, 0.0}, LossConfig{0.0, 1.0}, LossConfig{0.5, 0.5, 0.3}}) {
    EXPECT_LE(worst_fd_error(p, [&](const ModelParams& q, Gradients* g) { return regress_loss(q, x, y, cfg, g); }),
              1e-4);
  }
}

TEST(Gradients, ClassificationMatchesFiniteDifferences) {
  Rng rng(5);
  const ModelParams p = init_params({3, 2}, Head::kClassify, 5);
  const Matrix x = random_matrix(rng, 5, 3);
  const std::vector<int> classes = {0, 7, 124, 7, 60};
  EXPECT_LE(worst_fd_error(p, [&](const ModelParams& q, Gradients* g) { return classify_loss(q, x, classes, g); }),
            1e-4);
}

TEST(Transfer, CopiesHiddenLayersOnly) {
  const ModelParams c = init_params({8, 6, 4}, Head::kClassify, 6);
  const ModelParams r = transfer_to_regress(c, 7);
  EXPECT_EQ(r.head, Head::kRegress);
  EXPECT_EQ(r.layer_sizes, (std::vector<int>{8, 6, 4, 1}));
  for (std::size_t l = 0; l + 1 < c.weights.size(); ++l) {
    EXPECT_EQ(r.weights[l], c.weights[l]);
    EXPECT_EQ(r.biases[l], c.biases[l]);
  }
  EXPECT_EQ(r.weights.back().rows(), 1u);
  EXPECT_EQ(transfer_to_regress(c, 7), r);
}

TEST(Schedule, PiecewiseDrop) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.learning_rate(1), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.learning_rate(20), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.learning_rate(21), 5e-5);
  EXPECT_DOUBLE_EQ(cfg.learning_rate(41), 2.5e-6);
  cfg.patience = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Split, TailFractionAndSeed) {
  TrainConfig cfg;
  cfg.seed = 9;
  const ValidationSplit s = validation_split(50, cfg);
  EXPECT_EQ(s.validation.size(), 10u);
  EXPECT_EQ(s.train.size(), 40u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.validation.begin(), s.validation.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  TrainConfig other = cfg;
  other.seed = 10;
  other.split_seed = 9;
  EXPECT_EQ(validation_split(50, other).validation, s.validation);
}

ClassifySet two_class_set() {
  Rng rng(11);
  ClassifySet set{Matrix(40, 12), {}};
  for (std::size_t r = 0; r < 40; ++r) {
    const int cls = static_cast<int>(r % 2);
    for (double& v : set.features.row(r)) v = (cls == 0 ? 0.2 : 0.8) + uniform_between(rng, -0.02, 0.02);
    set.classes.push_back(cls);
  }
  return set;
}

TEST(Pretrain, SeparableTwoClassSet) {
  const ClassifySet set = two_class_set();
  TrainConfig cfg;
  cfg.mini_batch = 8;
  cfg.initial_lr = 0.01;
  cfg.lr_drop_period = 100;
  cfg.seed = 1;
  const TrainResult res = pretrain_classify(init_params({12, 8}, Head::kClassify, 1), set, cfg);
  const Matrix probs = forward(res.params, set.features);
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const auto row = probs.row(r);
    EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(), set.classes[r]);
  }
  EXPECT_GE(res.report.epochs.front().train_loss, res.report.epochs[res.report.best_epoch - 1].train_loss);
  EXPECT_EQ(pretrain_classify(init_params({12, 8}, Head::kClassify, 1), set, cfg).report, res.report);

  ClassifySet single = set;
  std::fill(single.classes.begin(), single.classes.end(), 3);
  EXPECT_THROW(pretrain_classify(init_params({12, 8}, Head::kClassify, 1), single, cfg), DataError);
}

TEST(Finetune, ConstantTargetWithMseOnly) {
  Rng rng(12);
  RegressSet set{random_matrix(rng, 60, 6), ScoreVector(60, 0.3)};
  TrainConfig cfg;
  cfg.mini_batch = 8;
  cfg.initial_lr = 0.03;
  cfg.lr_drop_period = 100;
  const TrainResult res = finetune_regress(init_params({6, 4}, Head::kRegress, 2), set, LossConfig{1.0, 0.0}, cfg);
  for (double y : predict(res.params, set.features)) EXPECT_NEAR(y, 0.3, 0.01);
  EXPECT_THROW(finetune_regress(init_params({6, 4}, Head::kRegress, 2), set, LossConfig{}, cfg), NumericError);
}

TEST(Finetune, EarlyStopBoundAndBestEpoch) {
  Rng rng(13);
  RegressSet set{random_matrix(rng, 50, 6), {}};
  for (std::size_t i = 0; i < 50; ++i) set.labels.push_back(uniform01(rng));  // pure noise overfits
  TrainConfig cfg;
  cfg.mini_batch = 8;
  cfg.initial_lr = 0.02;
  cfg.patience = 5;
  const TrainResult res = finetune_regress(init_params({6, 16}, Head::kRegress, 3), set, LossConfig{}, cfg);
  const TrainReport& rep = res.report;
  ASSERT_EQ(rep.stop, StopReason::kEarlyStop);
  EXPECT_EQ(static_cast<int>(rep.epochs.size()), rep.best_epoch + cfg.patience);
  for (const EpochRecord& e : rep.epochs) EXPECT_GE(e.val_loss, rep.best_val_loss);
  EXPECT_EQ(rep.epochs_to_reach(rep.best_val_loss), rep.best_epoch);
  EXPECT_EQ(rep.epochs_to_reach(-1.0), -1);
  EXPECT_EQ(rep.to_csv().rfind("epoch,train_loss,val_loss\n1,", 0), 0u);
}

TEST(Finetune, Errors) {
  Rng rng(14);
  RegressSet set{random_matrix(rng, 20, 6), ScoreVector(20, 0.5)};
  set.labels[0] = 0.1;
  TrainConfig cfg;
  cfg.mini_batch = 1;
  const ModelParams p = init_params({6, 4}, Head::kRegress, 2);
  EXPECT_THROW(finetune_regress(p, set, LossConfig{}, cfg), ConfigError);
  cfg.mini_batch = 8;
  set.labels[1] = 1.5;
  EXPECT_THROW(finetune_regress(p, set, LossConfig{}, cfg), DataError);
  EXPECT_THROW(finetune_regress(init_params({6, 4}, Head::kClassify, 2), set, LossConfig{}, cfg), ConfigError);
}

TEST(Serialization, RoundTripAndCorruption) {
  const ModelParams p = init_params({10, 7, 3}, Head::kClassify, 15);
  const auto bytes = serialize_params(p);
  EXPECT_EQ(deserialize_params(bytes), p);
  const auto path = std::filesystem::temp_directory_path() / "iqa_regressor_test" / "nested" / "m.mlp";
  save_params(p, path);
  EXPECT_EQ(load_params(path), p);
  std::filesystem::remove_all(path.parent_path().parent_path());

  auto bad = bytes;
  bad[0] ^= 0xff;
  EXPECT_THROW(deserialize_params(bad), DataError);
  EXPECT_THROW(deserialize_params(std::span(bytes).first(bytes.size() - 3)), DataError);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(deserialize_params(longer), DataError);
  EXPECT_THROW(load_params("/nonexistent/model.mlp"), DataError);
}

TEST(Features, Modes) {
  ImageTensor img(20, 20);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) {
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(r * 20 + c) / 400.0f;
    }
  }
  const auto crop = extract_features(img, {4, FeatureMode::kCenterCrop});
  ASSERT_EQ(crop.size(), 48u);
  EXPECT_EQ(crop[0], img.at(8, 8, 0));
  EXPECT_EQ(crop[47], img.at(11, 11, 2));

  ImageTensor flat(16, 16);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      for (int ch = 0; ch < 3; ++ch) flat.at(r, c, ch) = 0.4f;
    }
  }
  for (double v : extract_features(flat, {4, FeatureMode::kDownsample})) EXPECT_NEAR(v, 0.4, 1e-6);
  for (double v : extract_features(flat, {4, FeatureMode::kLocalEnergy})) EXPECT_NEAR(v, -3.0, 1e-6);
  EXPECT_THROW(extract_features(flat, {32, FeatureMode::kCenterCrop}), DataError);
}

TEST(Features, PoolingAveragesBlocks) {
  Rng rng(16);
  const Matrix x = random_matrix(rng, 3, 4 * 4 * 3);
  const Matrix pooled = pool_features(x, 4, 2);
  ASSERT_EQ(pooled.cols(), 12u);
  for (std::size_t s = 0; s < 3; ++s) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          double sum = 0.0;
          for (int dr = 0; dr < 2; ++dr) {
            for (int dc = 0; dc < 2; ++dc) sum += x(s, static_cast<std::size_t>(((2 * r + dr) * 4 + 2 * c + dc) * 3 + ch));
          }
          EXPECT_NEAR(pooled(s, static_cast<std::size_t>((r * 2 + c) * 3 + ch)), sum / 4.0, 1e-15);
        }
      }
    }
  }
  EXPECT_EQ(pool_features(x, 4, 1).data().size(), x.data().size());
  EXPECT_THROW(pool_features(x, 4, 3), ConfigError);
}

}  // namespace
}  // namespace iqa
