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
#include <chrono>
#include <cstdio>
#include <exception>
#include <set>

#include "iqa/error.hpp"
#include "iqa/harness.hpp"
#include "iqa/rng.hpp"
#include "json.hpp"

namespace iqa {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kPretrainInit = 0x100;
constexpr std::uint64_t kPretrainRun = 0x200;
constexpr std::uint64_t kHeadInit = 0x300;
constexpr std::uint64_t kFinetuneRun = 0x400;
constexpr std::uint64_t kHoldoutSplit = 0x500;

std::uint64_t learner_seed(std::uint64_t seed, std::uint64_t stream, std::size_t serial) {
  return combine_seed(combine_seed(seed, stream), serial);
}

// Re-raises the active exception with the stage prefixed, keeping its type
// so that the CLI exit code still reflects the cause.
[[noreturn]] void rethrow_in_stage(const std::string& stage) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(stage + ": " + e.what());
  }
}

// Runs fn(i) for i in [0, n) concurrently and rethrows the lowest-index
// failure, so the reported error does not depend on scheduling.
template <typename Fn>
void parallel_each(std::size_t n, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  const int count = static_cast<int>(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const char* mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::kCenterCrop: return "center_crop";
    case FeatureMode::kDownsample: return "downsample";
    case FeatureMode::kLocalEnergy: return "local_energy";
  }
  return "?";
}

FeatureMode parse_mode(const std::string& s) {
  if (s == "center_crop") return FeatureMode::kCenterCrop;
  if (s == "downsample") return FeatureMode::kDownsample;
  if (s == "local_energy") return FeatureMode::kLocalEnergy;
  throw ConfigError("unknown feature mode '" + s + "'");
}

ordered_json train_to_json(const TrainConfig& t) {
  return {{"mini_batch", t.mini_batch},       {"max_epochs", t.max_epochs},
          {"initial_lr", t.initial_lr},       {"lr_drop_factor", t.lr_drop_factor},
          {"lr_drop_period", t.lr_drop_period}, {"patience", t.patience},
          {"beta1", t.beta1},                 {"beta2", t.beta2},
          {"epsilon", t.epsilon},             {"validation_fraction", t.validation_fraction}};
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

void train_from_json(const nlohmann::json& j, TrainConfig& t, const std::string& where) {
  check_keys(j, {"mini_batch", "max_epochs", "initial_lr", "lr_drop_factor", "lr_drop_period", "patience", "beta1",
                 "beta2", "epsilon", "validation_fraction"},
             where);
  take(j, "mini_batch", t.mini_batch);
  take(j, "max_epochs", t.max_epochs);
  take(j, "initial_lr", t.initial_lr);
  take(j, "lr_drop_factor", t.lr_drop_factor);
  take(j, "lr_drop_period", t.lr_drop_period);
  take(j, "patience", t.patience);
  take(j, "beta1", t.beta1);
  take(j, "beta2", t.beta2);
  take(j, "epsilon", t.epsilon);
  take(j, "validation_fraction", t.validation_fraction);
}

std::vector<int> hidden_layers(const PipelineConfig& cfg, std::size_t i) {
  const BaseLearnerSpec& b = cfg.learners[i];
  const int pooled = cfg.views[b.view].side / b.pool;
  return {pooled * pooled * ImageTensor::kChannels, b.width};
}

// Columns of the learner's view, pooled.
Matrix learner_view(const PipelineConfig& cfg, std::size_t i, const Matrix& features) {
  const BaseLearnerSpec& b = cfg.learners[i];
  std::size_t offset = 0;
  for (int v = 0; v < b.view; ++v) offset += cfg.views[v].width();
  const std::size_t width = cfg.views[b.view].width();
  Matrix slice(features.rows(), width);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row(r);
    std::copy(row.begin() + offset, row.begin() + offset + width, slice.row(r).begin());
  }
  return pool_features(slice, cfg.views[b.view].side, b.pool);
}

bool dropped(const PipelineConfig& cfg, std::size_t serial) {
  return std::find(cfg.drop_bases.begin(), cfg.drop_bases.end(), static_cast<int>(serial)) != cfg.drop_bases.end();
}

std::vector<std::size_t> kept_serials(const PipelineConfig& cfg) {
  std::vector<std::size_t> kept;
  for (std::size_t s = 1; s <= cfg.learners.size(); ++s) {
    if (!dropped(cfg, s)) kept.push_back(s);
  }
  return kept;
}

TrainConfig finetune_config(const PipelineConfig& cfg, std::size_t serial) {
  TrainConfig tc = cfg.finetune_train;
  tc.seed = learner_seed(cfg.seed, kFinetuneRun, serial);
  tc.split_seed = combine_seed(cfg.seed, kHoldoutSplit);
  return tc;
}

void fit_meta(TrainedPipeline& p, const DatasetHandle& train) {
  const PipelineConfig& cfg = p.config;
  p.meta = MetaModel{};
  if (!cfg.meta) return;
  try {
    // Stacking on out-of-sample base predictions.
    const std::vector<std::size_t> rows = meta_rows(cfg, train.size());
    const Matrix features = train.features();
    Matrix held(rows.size(), features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto src = features.row(rows[r]);
      std::copy(src.begin(), src.end(), held.row(r).begin());
    }
    const ScoreVector labels = train.labels();
    const std::vector<ScoreVector> all = p.base_predictions(held);
    const std::vector<std::size_t> kept = kept_serials(cfg);
    PredictionMatrix data;
    for (std::size_t s : kept) data.columns.push_back(all[s - 1]);
    for (std::size_t r : rows) data.target.push_back(labels[r]);
    MetaModel m = slr_fit(data, cfg.meta_threshold);
    // Column positions back to learner serials.
    for (MetaTerm& t : m.terms) t.index = static_cast<int>(kept[static_cast<std::size_t>(t.index) - 1]);
    for (SelectionRound& r : m.trace) r.index = static_cast<int>(kept[static_cast<std::size_t>(r.index) - 1]);
    p.meta = std::move(m);
  } catch (...) {
    rethrow_in_stage("meta-fit");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (views.empty()) throw ConfigError("pipeline needs at least one feature view");
  for (const FeatureSpec& v : views) {
    if (v.side < 1) throw ConfigError("feature side must be >= 1");
  }
  if (learners.empty()) throw ConfigError("pipeline needs at least one base learner");
  for (const BaseLearnerSpec& b : learners) {
    if (b.width < 1) throw ConfigError("base learner widths must be positive");
    if (b.view < 0 || static_cast<std::size_t>(b.view) >= views.size()) {
      throw ConfigError("base learner view " + std::to_string(b.view) + " does not exist");
    }
    if (b.pool < 1 || views[b.view].side % b.pool != 0) {
      throw ConfigError("base learner pool factor must divide its view's side");
    }
  }
  std::set<int> seen;
  for (int d : drop_bases) {
    if (d < 1 || static_cast<std::size_t>(d) > learners.size()) {
      throw ConfigError("DROP_BASE index " + std::to_string(d) + " names no base learner");
    }
    if (!seen.insert(d).second) throw ConfigError("DROP_BASE index repeated");
  }
  if (seen.size() == learners.size()) throw ConfigError("every base learner is dropped");
  if (!(meta_threshold > 0.0)) throw ConfigError("meta threshold must be positive");
  loss.validate();
  pretrain_train.validate();
  finetune_train.validate();
}

std::string PipelineConfig::to_json() const {
  ordered_json j;
  j["views"] = ordered_json::array();
  for (const FeatureSpec& v : views) j["views"].push_back({{"side", v.side}, {"mode", mode_name(v.mode)}});
  j["learners"] = ordered_json::array();
  for (const BaseLearnerSpec& b : learners) {
    j["learners"].push_back({{"width", b.width}, {"view", b.view}, {"pool", b.pool}});
  }
  j["pretrain"] = pretrain;
  j["meta"] = meta;
  j["drop_bases"] = drop_bases;
  j["loss"] = {{"lambda1", loss.lambda1},
               {"lambda2", loss.lambda2},
               {"temperature", loss.temperature},
               {"mse", loss.mse == MseConvention::kMean ? "mean" : "half_sum"}};
  j["pretrain_train"] = train_to_json(pretrain_train);
  j["finetune_train"] = train_to_json(finetune_train);
  j["meta_threshold"] = meta_threshold;
  j["seed"] = seed;
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text, const PipelineConfig& base) {
  PipelineConfig cfg = base;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    check_keys(j, {"views", "learners", "pretrain", "meta", "drop_bases", "loss", "pretrain_train",
                   "finetune_train", "meta_threshold", "seed"},
               "pipeline config");
    if (j.contains("views")) {
      cfg.views.clear();
      for (const auto& v : j.at("views")) {
        check_keys(v, {"side", "mode"}, "views");
        FeatureSpec f;
        take(v, "side", f.side);
        if (v.contains("mode")) f.mode = parse_mode(v.at("mode").get<std::string>());
        cfg.views.push_back(f);
      }
    }
    if (j.contains("learners")) {
      cfg.learners.clear();
      for (const auto& b : j.at("learners")) {
        check_keys(b, {"width", "view", "pool"}, "learners");
        BaseLearnerSpec spec;
        take(b, "width", spec.width);
        take(b, "view", spec.view);
        take(b, "pool", spec.pool);
        cfg.learners.push_back(spec);
      }
    }
    take(j, "pretrain", cfg.pretrain);
    take(j, "meta", cfg.meta);
    take(j, "drop_bases", cfg.drop_bases);
    if (j.contains("loss")) {
      const auto& l = j.at("loss");
      check_keys(l, {"lambda1", "lambda2", "temperature", "mse"}, "loss");
      take(l, "lambda1", cfg.loss.lambda1);
      take(l, "lambda2", cfg.loss.lambda2);
      take(l, "temperature", cfg.loss.temperature);
      if (l.contains("mse")) {
        const std::string m = l.at("mse").get<std::string>();
        if (m == "mean") {
          cfg.loss.mse = MseConvention::kMean;
        } else if (m == "half_sum") {
          cfg.loss.mse = MseConvention::kHalfSum;
        } else {
          throw ConfigError("unknown mse convention '" + m + "'");
        }
      }
    }
    if (j.contains("pretrain_train")) train_from_json(j.at("pretrain_train"), cfg.pretrain_train, "pretrain_train");
    if (j.contains("finetune_train")) train_from_json(j.at("finetune_train"), cfg.finetune_train, "finetune_train");
    take(j, "meta_threshold", cfg.meta_threshold);
    take(j, "seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::from_json(const std::string& text) { return from_json(text, PipelineConfig{}); }

std::vector<ScoreVector> TrainedPipeline::base_predictions(const Matrix& features) const {
  std::vector<ScoreVector> out;
  out.reserve(learners.size());
  for (std::size_t i = 0; i < learners.size(); ++i) {
    out.push_back(iqa::predict(learners[i], learner_view(config, i, features)));
  }
  return out;
}

ScoreVector TrainedPipeline::predict(const Matrix& features) const {
  const std::vector<ScoreVector> cols = base_predictions(features);
  const std::vector<std::size_t> kept = kept_serials(config);
  ScoreVector out(features.rows());
  std::vector<double> row(cols.size());
  std::vector<double> kept_row(kept.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) row[c] = cols[c][r];
    if (config.meta) {
      out[r] = meta_predict_row(meta, row);
    } else {
      for (std::size_t k = 0; k < kept.size(); ++k) kept_row[k] = row[kept[k] - 1];
      out[r] = average_predict(kept_row);
    }
  }
  return out;
}

std::vector<TrainResult> pretrain_learners(const ClassifySet& corpus, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<TrainResult> out(cfg.learners.size());
  try {
    parallel_each(out.size(), [&](std::size_t i) {
      const ModelParams init =
          init_params(hidden_layers(cfg, i), Head::kClassify, learner_seed(cfg.seed, kPretrainInit, i + 1));
      TrainConfig tc = cfg.pretrain_train;
      tc.seed = learner_seed(cfg.seed, kPretrainRun, i + 1);
      out[i] = pretrain_classify(init, {learner_view(cfg, i, corpus.features), corpus.classes}, tc);
    });
  } catch (...) {
    rethrow_in_stage("pretrain");
  }
  return out;
}

TrainedPipeline train_pipeline(const DatasetHandle& train, const ClassifySet* corpus, const PipelineConfig& cfg,
                               const std::vector<TrainResult>* pretrained) {
  cfg.validate();
  if (train.feature_width() != views_width(cfg.views)) {
    throw ConfigError("dataset '" + train.name() + "' feature width does not match the pipeline feature spec");
  }
  TrainedPipeline p;
  p.config = cfg;
  const std::size_t k = cfg.learners.size();

  std::vector<TrainResult> local;
  if (cfg.pretrain && pretrained == nullptr) {
    if (corpus == nullptr) throw ConfigError("pre-training enabled but no distortion corpus supplied");
    local = pretrain_learners(*corpus, cfg);
    pretrained = &local;
  }
  if (cfg.pretrain && pretrained->size() != k) throw ConfigError("pre-trained learner count does not match the learner list");

  const RegressSet data{train.features(), train.labels()};
  p.learners.resize(k);
  p.finetune_reports.resize(k);
  try {
    parallel_each(k, [&](std::size_t i) {
      const std::uint64_t head_seed = learner_seed(cfg.seed, kHeadInit, i + 1);
      const ModelParams init = cfg.pretrain ? transfer_to_regress((*pretrained)[i].params, head_seed)
                                            : init_params(hidden_layers(cfg, i), Head::kRegress, head_seed);
      const TrainConfig tc = finetune_config(cfg, i + 1);
      TrainResult r = finetune_regress(init, {learner_view(cfg, i, data.features), data.labels}, cfg.loss, tc);
      p.learners[i] = std::move(r.params);
      p.finetune_reports[i] = std::move(r.report);
    });
  } catch (...) {
    rethrow_in_stage("finetune");
  }
  if (cfg.pretrain) {
    for (const TrainResult& r : *pretrained) p.pretrain_reports.push_back(r.report);
  }
  fit_meta(p, train);
  return p;
}

std::vector<std::size_t> meta_rows(const PipelineConfig& cfg, std::size_t n) {
  return validation_split(n, finetune_config(cfg, 1)).validation;
}

TrainedPipeline refit_meta(const TrainedPipeline& base, const DatasetHandle& train, const PipelineConfig& cfg) {
  cfg.validate();
  TrainedPipeline p = base;
  p.config.meta = cfg.meta;
  p.config.drop_bases = cfg.drop_bases;
  p.config.meta_threshold = cfg.meta_threshold;
  fit_meta(p, train);
  return p;
}

std::string fingerprint(const PipelineConfig& cfg, const DatasetHandle& train, const DatasetHandle& test,
                        const std::string& variant) {
  std::uint64_t h = fnv1a(cfg.to_json());
  h = combine_seed(h, train.content_hash());
  h = combine_seed(h, test.content_hash());
  h = combine_seed(h, fnv1a(variant));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EvalReport evaluate(const TrainedPipeline& pipeline, const DatasetHandle& test, const std::string& fp) {
  EvalReport r;
  r.dataset = test.name();
  r.fingerprint = fp;
  r.loss = pipeline.config.loss;
  r.meta_equation = pipeline.config.meta ? pipeline.meta.equation() : "Y = mean(P_i(X))";
  r.ids = test.ids();
  try {
    r.predictions = pipeline.predict(test.features());
    r.labels = test.metric_labels();
    r.residuals.resize(r.labels.size());
    for (std::size_t i = 0; i < r.labels.size(); ++i) r.residuals[i] = r.labels[i] - r.predictions[i];
    r.plcc = plcc(r.predictions, r.labels);
    r.srocc = srocc(r.predictions, r.labels);
    r.rmse = rmse(r.predictions, r.labels);
  } catch (...) {
    rethrow_in_stage("evaluate");
  }
  return r;
}

EvalReport eval_holdout(const DatasetHandle& train, const DatasetHandle& test, const ClassifySet* corpus,
                        const PipelineConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> a = train.ids();
  std::vector<std::string> b = test.ids();
  std::sort(b.begin(), b.end());
  for (const std::string& id : a) {
    if (std::binary_search(b.begin(), b.end(), id)) throw ConfigError("train and test share entry '" + id + "'");
  }
  const TrainedPipeline p = train_pipeline(train, corpus, cfg);
  EvalReport r = evaluate(p, test, fingerprint(cfg, train, test));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

EvalReport eval_cross_dataset(const DatasetHandle& train_ds, const DatasetHandle& test_ds, const ClassifySet* corpus,
                              const PipelineConfig& cfg) {
  if (train_ds.name() == test_ds.name()) {
    throw ConfigError("cross-dataset evaluation needs distinct dataset names (got '" + train_ds.name() + "' twice)");
  }
  const auto start = std::chrono::steady_clock::now();
  DatasetHandle sealed = test_ds;
  sealed.seal();
  const TrainedPipeline p = train_pipeline(train_ds, corpus, cfg);
  EvalReport r = evaluate(p, sealed, fingerprint(cfg, train_ds, test_ds, "cross"));
  r.dataset = train_ds.name() + "->" + test_ds.name();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string AblationToggle::name() const {
  switch (kind) {
    case ToggleKind::kNoMeta: return "NO_META";
    case ToggleKind::kMseOnlyLoss: return "MSE_ONLY_LOSS";
    case ToggleKind::kNoPretrain: return "NO_PRETRAIN";
    case ToggleKind::kDropBase: return "DROP_BASE(" + std::to_string(index) + ")";
  }
  return "?";
}

AblationToggle AblationToggle::parse(const std::string& text) {
  if (text == "NO_META") return {ToggleKind::kNoMeta, 0};
  if (text == "MSE_ONLY_LOSS") return {ToggleKind::kMseOnlyLoss, 0};
  if (text == "NO_PRETRAIN") return {ToggleKind::kNoPretrain, 0};
  const std::string prefix = "DROP_BASE(";
  if (text.size() > prefix.size() + 1 && text.compare(0, prefix.size(), prefix) == 0 && text.back() == ')') {
    const std::string digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
      return {ToggleKind::kDropBase, std::stoi(digits)};
    }
  }
  throw ConfigError("unknown ablation toggle '" + text + "'");
}

PipelineConfig apply_toggle(const PipelineConfig& cfg, const AblationToggle& toggle) {
  PipelineConfig out = cfg;
  switch (toggle.kind) {
    case ToggleKind::kNoMeta: out.meta = false; break;
    case ToggleKind::kMseOnlyLoss: out.loss.lambda2 = 0.0; break;
    case ToggleKind::kNoPretrain: out.pretrain = false; break;
    case ToggleKind::kDropBase: out.drop_bases.push_back(toggle.index); break;
  }
  out.validate();
  return out;
}

std::vector<EvalReport> run_ablation(const DatasetHandle& train, const DatasetHandle& test, const ClassifySet* corpus,
                                     const PipelineConfig& cfg, const std::vector<AblationToggle>& toggles) {
  cfg.validate();
  std::vector<PipelineConfig> variants;
  for (const AblationToggle& t : toggles) variants.push_back(apply_toggle(cfg, t));

  auto start = std::chrono::steady_clock::now();
  std::vector<TrainResult> pretrained;
  if (cfg.pretrain) {
    if (corpus == nullptr) throw ConfigError("pre-training enabled but no distortion corpus supplied");
    pretrained = pretrain_learners(*corpus, cfg);
  }
  const TrainedPipeline baseline = train_pipeline(train, corpus, cfg, cfg.pretrain ? &pretrained : nullptr);
  std::vector<EvalReport> reports;
  reports.push_back(evaluate(baseline, test, fingerprint(cfg, train, test)));
  reports.back().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (std::size_t i = 0; i < toggles.size(); ++i) {
    start = std::chrono::steady_clock::now();
    const PipelineConfig& v = variants[i];
    TrainedPipeline p;
    switch (toggles[i].kind) {
      case ToggleKind::kNoMeta:
      case ToggleKind::kDropBase:
        // Only the meta stage changes; the base learners are shared.
        p = refit_meta(baseline, train, v);
        break;
      case ToggleKind::kMseOnlyLoss:
        p = train_pipeline(train, corpus, v, v.pretrain ? &pretrained : nullptr);
        break;
      case ToggleKind::kNoPretrain:
        p = train_pipeline(train, nullptr, v);
        break;
    }
    EvalReport r = evaluate(p, test, fingerprint(v, train, test, toggles[i].name()));
    r.variant = toggles[i].name();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace iqa
