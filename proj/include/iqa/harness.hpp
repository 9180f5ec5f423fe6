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

// Experiment orchestration: datasets, splits, the train/predict pipeline,
// holdout and cross-dataset evaluation, and the ablation matrix.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iqa/metalearner.hpp"
#include "iqa/qaloss.hpp"
#include "iqa/regressor.hpp"

namespace iqa {

enum class Provenance { kGenerated, kExternal };

struct DatasetEntry {
  std::string id;  // image path or synthetic identifier
  std::vector<double> features;
  double label = 0.0;  // scaled MOS in [0, 1]
  int class_index = -1;  // distortion class when known
};

/// Named set of labeled feature rows. A sealed handle refuses label reads
/// through labels(); only metric_labels(), used by the metric stage, still
/// returns them.
class DatasetHandle {
 public:
  DatasetHandle() = default;
  /// Throws ConfigError on an empty name or entry list, DataError on a label
  /// outside [0, 1] or ragged feature widths.
  DatasetHandle(std::string name, Provenance provenance, std::vector<DatasetEntry> entries);

  const std::string& name() const { return name_; }
  Provenance provenance() const { return provenance_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t feature_width() const { return entries_.front().features.size(); }
  const std::string& id(std::size_t i) const { return entries_[i].id; }
  std::vector<std::string> ids() const;

  Matrix features() const;
  /// Throws DataError when sealed.
  ScoreVector labels() const;
  ScoreVector metric_labels() const;

  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

  /// Subset by entry index, keeping name, provenance and seal.
  DatasetHandle subset(std::span<const std::size_t> indices, const std::string& name) const;
  /// Hash of names, ids, features and labels.
  std::uint64_t content_hash() const;

 private:
  std::string name_;
  Provenance provenance_ = Provenance::kGenerated;
  std::vector<DatasetEntry> entries_;
  bool sealed_ = false;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitResult {
  DatasetHandle train;
  DatasetHandle test;
};

/// Seeded shuffle, |train| = round(n * fraction). Needs at least 5 entries.
SplitResult split(const DatasetHandle& ds, const SplitSpec& spec);

/// Synthetic corpus with a planted quality law: pristine scenes are distorted
/// at every (model, level) and labeled 1 - level / 5 plus uniform jitter in
/// [-jitter, jitter], clamped to [0, 1].
struct PlantedSpec {
  int scenes = 40;
  int image_size = 64;
  std::vector<int> models = {24, 25};
  double jitter = 0.02;
  std::uint64_t seed = 0;
};

/// Feature views concatenated in order into one row per image.
using FeatureViews = std::vector<FeatureSpec>;

std::size_t views_width(const FeatureViews& views);
std::vector<double> extract_views(const ImageTensor& img, const FeatureViews& views);

DatasetHandle make_planted_dataset(const std::string& name, const PlantedSpec& spec, const FeatureViews& views);
/// Same images, keyed by distortion class for pre-training.
ClassifySet make_pretrain_set(const PlantedSpec& spec, const FeatureViews& views);
/// Generated corpus on disk: labels follow the same law from each manifest
/// entry's level.
DatasetHandle dataset_from_manifest(const std::string& name, const std::filesystem::path& manifest,
                                    const FeatureViews& views, double jitter, std::uint64_t seed);
/// Manifest entries as a pre-training set.
ClassifySet pretrain_set_from_manifest(const std::filesystem::path& manifest, const FeatureViews& views);

/// Two-column CSV "filename,mos" with a header row. Filenames resolve
/// against `image_dir`; labels are rescaled with scale_mos.
DatasetHandle import_external(const std::filesystem::path& mos_file, const std::filesystem::path& image_dir,
                              double mos_min, double mos_max, const FeatureViews& views);

/// One base learner: hidden width, the feature view it reads and the
/// average-pooling factor applied to that view's grid.
struct BaseLearnerSpec {
  int width = 32;
  int view = 0;
  int pool = 1;
};

struct PipelineConfig {
  FeatureViews views = {{16, FeatureMode::kLocalEnergy}};
  /// Learner i (1-based) is learners[i - 1] with its own seed stream.
  std::vector<BaseLearnerSpec> learners = {{64, 0, 1}, {32, 0, 2}, {16, 0, 4}, {8, 0, 16}};
  bool pretrain = true;
  bool meta = true;  // false: uniform average of base predictions
  std::vector<int> drop_bases;  // 1-based learner serials excluded before meta-fit
  LossConfig loss;
  TrainConfig pretrain_train;
  TrainConfig finetune_train;
  double meta_threshold = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  /// Merges the keys present in `text` over `base`.
  static PipelineConfig from_json(const std::string& text, const PipelineConfig& base);
  static PipelineConfig from_json(const std::string& text);
};

struct TrainedPipeline {
  PipelineConfig config;
  std::vector<ModelParams> learners;  // index i holds serial i + 1
  std::vector<TrainReport> pretrain_reports;
  std::vector<TrainReport> finetune_reports;
  MetaModel meta;

  /// Base-learner predictions, one column per learner.
  std::vector<ScoreVector> base_predictions(const Matrix& features) const;
  ScoreVector predict(const Matrix& features) const;
};

/// Classifiers pre-trained once and shared between pipeline variants.
std::vector<TrainResult> pretrain_learners(const ClassifySet& corpus, const PipelineConfig& cfg);

/// Runs every stage. `pretrained` (one per base width) skips pre-training;
/// otherwise `corpus` is required when cfg.pretrain is set. Errors carry the
/// failing stage in their message.
TrainedPipeline train_pipeline(const DatasetHandle& train, const ClassifySet* corpus, const PipelineConfig& cfg,
                               const std::vector<TrainResult>* pretrained = nullptr);
/// Training rows the meta stage is fitted on: the validation tail that every
/// base learner held out during fine-tuning.
std::vector<std::size_t> meta_rows(const PipelineConfig& cfg, std::size_t n);
/// Refits only the meta stage of `base` under `cfg` (meta, drop_bases,
/// meta_threshold).
TrainedPipeline refit_meta(const TrainedPipeline& base, const DatasetHandle& train, const PipelineConfig& cfg);

struct EvalReport {
  std::string dataset;
  std::string variant = "baseline";
  double plcc = 0.0;
  double srocc = 0.0;
  double rmse = 0.0;
  std::vector<std::string> ids;
  ScoreVector labels;
  ScoreVector predictions;
  ScoreVector residuals;  // label - prediction
  std::string fingerprint;
  LossConfig loss;
  std::string meta_equation;
  double seconds = 0.0;
};

/// Metrics of a trained pipeline on `test`; labels come from metric_labels().
EvalReport evaluate(const TrainedPipeline& pipeline, const DatasetHandle& test, const std::string& fingerprint);

std::string fingerprint(const PipelineConfig& cfg, const DatasetHandle& train, const DatasetHandle& test,
                        const std::string& variant = "baseline");

EvalReport eval_holdout(const DatasetHandle& train, const DatasetHandle& test, const ClassifySet* corpus,
                        const PipelineConfig& cfg);
/// Trains on all of `train_ds`, tests on all of `test_ds` (sealed until the
/// metric stage). Throws ConfigError when the names coincide.
EvalReport eval_cross_dataset(const DatasetHandle& train_ds, const DatasetHandle& test_ds, const ClassifySet* corpus,
                              const PipelineConfig& cfg);

enum class ToggleKind { kNoMeta, kMseOnlyLoss, kNoPretrain, kDropBase };

struct AblationToggle {
  ToggleKind kind = ToggleKind::kNoMeta;
  int index = 0;  // learner serial for kDropBase

  std::string name() const;
  /// "NO_META", "MSE_ONLY_LOSS", "NO_PRETRAIN" or "DROP_BASE(i)".
  static AblationToggle parse(const std::string& text);
};

PipelineConfig apply_toggle(const PipelineConfig& cfg, const AblationToggle& toggle);

/// Baseline report first, then one per toggle in the given order.
std::vector<EvalReport> run_ablation(const DatasetHandle& train, const DatasetHandle& test, const ClassifySet* corpus,
                                     const PipelineConfig& cfg, const std::vector<AblationToggle>& toggles);

// Report files.

/// Header "dataset,plcc,srocc,rmse,fingerprint".
std::string reports_csv(const std::vector<EvalReport>& reports);
/// Header "id,label,prediction,residual".
std::string residuals_csv(const EvalReport& report);
/// Whitespace-separated two-column x/y text.
std::string plot_data(std::span<const double> xs, std::span<const double> ys);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace iqa
