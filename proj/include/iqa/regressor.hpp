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

// Multilayer perceptron over flattened image-patch features.
//
// Hidden layers use ReLU. The head is either a 125-way softmax classifier
// for distortion pre-training or a single sigmoid unit for quality
// regression. Training uses Adam with a piecewise learning-rate drop and
// early stopping on a held-out tail of the shuffled training set.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iqa/image.hpp"
#include "iqa/matrix.hpp"
#include "iqa/metrics.hpp"
#include "iqa/qaloss.hpp"

namespace iqa {

enum class Head { kClassify, kRegress };

inline constexpr int kClassifyOutputs = 125;

struct ModelParams {
  /// Input width, hidden widths, then the head width (125 or 1).
  std::vector<int> layer_sizes;
  Head head = Head::kRegress;
  /// weights[l] is layer_sizes[l + 1] x layer_sizes[l].
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  std::size_t input_width() const { return static_cast<std::size_t>(layer_sizes.front()); }
  std::size_t output_width() const { return static_cast<std::size_t>(layer_sizes.back()); }
  std::size_t parameter_count() const;
  /// Throws ConfigError when shapes do not chain or the head width is wrong.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// `layer_sizes` lists the input width followed by hidden widths; the head
/// layer is appended. Hidden weights are He-uniform, head weights
/// Glorot-uniform, biases zero.
ModelParams init_params(const std::vector<int>& layer_sizes, Head head, std::uint64_t seed);

/// Copies every hidden layer and draws a fresh regression head.
ModelParams transfer_to_regress(const ModelParams& classifier, std::uint64_t seed);

/// Rows are samples. Classify: softmax probabilities (n x 125). Regress:
/// sigmoid outputs (n x 1).
Matrix forward(const ModelParams& params, const Matrix& batch);
/// Regression outputs as a flat vector.
ScoreVector predict(const ModelParams& params, const Matrix& batch);

/// Same shapes as ModelParams.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

/// Mean categorical cross-entropy over the batch; fills `grad` if non-null.
double classify_loss(const ModelParams& params, const Matrix& batch, std::span<const int> classes,
                     Gradients* grad);
/// Quality-aware loss on the batch's sigmoid outputs; fills `grad` if non-null.
double regress_loss(const ModelParams& params, const Matrix& batch, std::span<const double> targets,
                    const LossConfig& loss, Gradients* grad);

struct TrainConfig {
  int mini_batch = 32;
  int max_epochs = 100;
  double initial_lr = 1e-3;
  double lr_drop_factor = 0.05;
  int lr_drop_period = 20;
  int patience = 20;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Seed of the train/validation shuffle; defaults to `seed`. Learners that
  /// share it hold out the same samples.
  std::optional<std::uint64_t> split_seed;

  void validate() const;
  /// Learning rate in effect during `epoch` (1-based).
  double learning_rate(int epoch) const;
};

struct ValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;  // the last validation_fraction of the shuffle
};

/// The split train_loop uses for `n` samples under `cfg`.
ValidationSplit validation_split(std::size_t n, const TrainConfig& cfg);

enum class StopReason { kMaxEpochs, kEarlyStop };

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  StopReason stop = StopReason::kMaxEpochs;
  int best_epoch = 0;  // 1-based
  double best_val_loss = 0.0;

  /// "epoch,train_loss,val_loss" with one row per epoch.
  std::string to_csv() const;
  /// First epoch whose validation loss is <= target, or -1.
  int epochs_to_reach(double target) const;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// Classification training set: one feature row and one class per sample.
struct ClassifySet {
  Matrix features;
  std::vector<int> classes;  // 0-based, < 125
};

/// Regression training set: labels are scaled MOS in [0, 1].
struct RegressSet {
  Matrix features;
  ScoreVector labels;
};

TrainResult pretrain_classify(const ModelParams& init, const ClassifySet& data, const TrainConfig& cfg);
TrainResult finetune_regress(const ModelParams& init, const RegressSet& data, const LossConfig& loss,
                             const TrainConfig& cfg);

// Features.

enum class FeatureMode {
  kCenterCrop,  // native-resolution side x side window at the image center
  kDownsample,  // area average of the whole image onto side x side
  /// Per cell of a side x side grid: log energy of the residual after a
  /// sigma-1 Gaussian blur, log10(1e-6 + e) + 3 so 1e-3 maps to 0.
  kLocalEnergy,
};

struct FeatureSpec {
  int side = 16;
  FeatureMode mode = FeatureMode::kCenterCrop;

  std::size_t width() const { return static_cast<std::size_t>(side) * side * ImageTensor::kChannels; }
};

/// Flattened H x W x 3 patch in [0, 1].
std::vector<double> extract_features(const ImageTensor& img, const FeatureSpec& spec);
Matrix feature_matrix(std::span<const ImageTensor> images, const FeatureSpec& spec);

/// Average-pools a batch of feature rows laid out as side x side x 3 grids
/// by `factor` in each direction. `factor` must divide `side`.
Matrix pool_features(const Matrix& features, int side, int factor);

/// Loads every image named in a corpus manifest as a classification set.
/// Relative output paths resolve against the manifest's directory.
ClassifySet load_classify_set(const std::filesystem::path& manifest, const FeatureSpec& spec);

// Serialization: "IQAMLP" magic, format version, head, layer sizes, then
// little-endian doubles.

std::vector<std::uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(std::span<const std::uint8_t> bytes);
void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace iqa
