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
#include <cstring>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/harness.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSceneStream = 0x5ce7e;
constexpr std::uint64_t kJitterStream = 0x717e;

double planted_label(int level, double jitter, std::uint64_t seed, std::uint64_t item) {
  const double u = CounterRng{combine_seed(seed, kJitterStream)}.uniform(item, 0);
  return std::clamp(1.0 - level / 5.0 + jitter * (2.0 * u - 1.0), 0.0, 1.0);
}

// One synthesized scene per index, distorted at every (model, level).
struct PlantedItem {
  ImageTensor image;
  int model = 0;
  int level = 0;
  std::string id;
};

std::vector<PlantedItem> planted_items(const PlantedSpec& spec) {
  if (spec.scenes < 1) throw ConfigError("planted dataset needs at least one scene");
  if (spec.models.empty()) throw ConfigError("planted dataset needs at least one distortion model");
  if (!(spec.jitter >= 0.0 && spec.jitter < 0.1)) throw ConfigError("planted jitter must lie in [0, 0.1)");
  const SeveritySchedule schedule = SeveritySchedule::defaults();
  const std::size_t per_scene = spec.models.size() * kSeverityLevels;
  std::vector<PlantedItem> items(static_cast<std::size_t>(spec.scenes) * per_scene);
  std::vector<std::exception_ptr> errors(spec.scenes);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < spec.scenes; ++s) {
    try {
      const auto scene_seed = combine_seed(combine_seed(spec.seed, kSceneStream), static_cast<std::uint64_t>(s));
      const ImageTensor scene = synthesize_scene(spec.image_size, spec.image_size, scene_seed);
      std::size_t k = static_cast<std::size_t>(s) * per_scene;
      for (int m : spec.models) {
        for (int l = 1; l <= kSeverityLevels; ++l, ++k) {
          const DistortionSpec d{m, l, corpus_item_seed(spec.seed, "scene" + std::to_string(s), m, l)};
          items[k].image = apply_distortion(scene, d, schedule);
          items[k].model = m;
          items[k].level = l;
          items[k].id = "scene" + std::to_string(s) + "_m" + std::to_string(m) + "_l" + std::to_string(l);
        }
      }
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return items;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

std::size_t views_width(const FeatureViews& views) {
  std::size_t w = 0;
  for (const FeatureSpec& v : views) w += v.width();
  return w;
}

std::vector<double> extract_views(const ImageTensor& img, const FeatureViews& views) {
  if (views.empty()) throw ConfigError("no feature views configured");
  std::vector<double> out;
  out.reserve(views_width(views));
  for (const FeatureSpec& v : views) {
    const std::vector<double> f = extract_features(img, v);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

DatasetHandle::DatasetHandle(std::string name, Provenance provenance, std::vector<DatasetEntry> entries)
    : name_(std::move(name)), provenance_(provenance), entries_(std::move(entries)) {
  if (name_.empty()) throw ConfigError("dataset name must not be empty");
  if (entries_.empty()) throw ConfigError("dataset '" + name_ + "' has no entries");
  const std::size_t width = entries_.front().features.size();
  for (const DatasetEntry& e : entries_) {
    if (!(e.label >= 0.0 && e.label <= 1.0)) throw DataError("label outside [0, 1] for " + e.id);
    if (e.features.size() != width) throw DataError("ragged feature widths in dataset '" + name_ + "'");
  }
}

std::vector<std::string> DatasetHandle::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const DatasetEntry& e : entries_) out.push_back(e.id);
  return out;
}

Matrix DatasetHandle::features() const {
  Matrix m(entries_.size(), feature_width());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::copy(entries_[i].features.begin(), entries_[i].features.end(), m.row(i).begin());
  }
  return m;
}

ScoreVector DatasetHandle::labels() const {
  if (sealed_) throw DataError("labels of sealed dataset '" + name_ + "' read before the metric stage");
  return metric_labels();
}

ScoreVector DatasetHandle::metric_labels() const {
  ScoreVector out;
  out.reserve(entries_.size());
  for (const DatasetEntry& e : entries_) out.push_back(e.label);
  return out;
}

DatasetHandle DatasetHandle::subset(std::span<const std::size_t> indices, const std::string& name) const {
  std::vector<DatasetEntry> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(entries_.at(i));
  DatasetHandle out(name, provenance_, std::move(picked));
  out.sealed_ = sealed_;
  return out;
}

std::uint64_t DatasetHandle::content_hash() const {
  std::uint64_t h = fnv1a(name_);
  for (const DatasetEntry& e : entries_) {
    h = combine_seed(h, fnv1a(e.id));
    std::uint64_t bits = 0;
    for (double f : e.features) {
      std::memcpy(&bits, &f, sizeof bits);
      h = combine_seed(h, bits);
    }
    std::memcpy(&bits, &e.label, sizeof bits);
    h = combine_seed(h, bits);
  }
  return h;
}

SplitResult split(const DatasetHandle& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (ds.size() < 5) throw ConfigError("dataset '" + ds.name() + "' is too small to split (needs >= 5 entries)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(combine_seed(spec.seed, fnv1a(ds.name())));
  shuffle_in_place(order, rng);
  auto n_train = static_cast<std::size_t>(std::lround(static_cast<double>(ds.size()) * spec.train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, ds.size() - 1);
  const std::span<const std::size_t> all(order);
  return {ds.subset(all.first(n_train), ds.name() + "/train"), ds.subset(all.subspan(n_train), ds.name() + "/test")};
}

DatasetHandle make_planted_dataset(const std::string& name, const PlantedSpec& spec, const FeatureViews& views) {
  const std::vector<PlantedItem> items = planted_items(spec);
  std::vector<DatasetEntry> entries(items.size());
  const int n = static_cast<int>(items.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    entries[i].id = items[i].id;
    entries[i].features = extract_views(items[i].image, views);
    entries[i].label = planted_label(items[i].level, spec.jitter, spec.seed, static_cast<std::uint64_t>(i));
    entries[i].class_index = pseudo_label({items[i].model, items[i].level, 0}).class_index;
  }
  return DatasetHandle(name, Provenance::kGenerated, std::move(entries));
}

ClassifySet make_pretrain_set(const PlantedSpec& spec, const FeatureViews& views) {
  const std::vector<PlantedItem> items = planted_items(spec);
  ClassifySet set{Matrix(items.size(), views_width(views)), std::vector<int>(items.size())};
  const int n = static_cast<int>(items.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const std::vector<double> f = extract_views(items[i].image, views);
    std::copy(f.begin(), f.end(), set.features.row(i).begin());
    set.classes[i] = pseudo_label({items[i].model, items[i].level, 0}).class_index;
  }
  return set;
}

DatasetHandle dataset_from_manifest(const std::string& name, const fs::path& manifest, const FeatureViews& views,
                                    double jitter, std::uint64_t seed) {
  const std::vector<ManifestEntry> rows = read_manifest(manifest);
  if (rows.empty()) throw DataError("manifest is empty: " + manifest.string());
  std::vector<DatasetEntry> entries(rows.size());
  std::vector<std::exception_ptr> errors(rows.size());
  const int n = static_cast<int>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fs::path p = rows[i].output;
      if (p.is_relative()) p = manifest.parent_path() / p;
      entries[i].id = rows[i].output;
      entries[i].features = extract_views(load_image(p), views);
      entries[i].label = planted_label(rows[i].level, jitter, seed, static_cast<std::uint64_t>(i));
      entries[i].class_index = rows[i].class_index;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return DatasetHandle(name, Provenance::kGenerated, std::move(entries));
}

ClassifySet pretrain_set_from_manifest(const fs::path& manifest, const FeatureViews& views) {
  const DatasetHandle ds = dataset_from_manifest("pretrain", manifest, views, 0.0, 0);
  ClassifySet set{ds.features(), {}};
  for (const ManifestEntry& e : read_manifest(manifest)) set.classes.push_back(e.class_index);
  return set;
}

DatasetHandle import_external(const fs::path& mos_file, const fs::path& image_dir, double mos_min, double mos_max,
                              const FeatureViews& views) {
  if (!(mos_min < mos_max)) throw ConfigError("import: mos_min must be below mos_max");
  std::ifstream in(mos_file);
  if (!in) throw DataError("cannot open MOS file: " + mos_file.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("MOS file is empty: " + mos_file.string());
  std::vector<DatasetEntry> entries;
  for (int row = 2; std::getline(in, line); ++row) {
    if (trim(line).empty()) continue;
    const auto comma = line.rfind(',');
    const std::string where = mos_file.filename().string() + " row " + std::to_string(row);
    if (comma == std::string::npos) throw DataError(where + ": expected 'filename,mos'");
    const std::string file = trim(line.substr(0, comma));
    double mos = 0.0;
    try {
      std::size_t used = 0;
      const std::string text = trim(line.substr(comma + 1));
      mos = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw DataError(where + ": MOS is not a number");
    }
    const fs::path path = image_dir / file;
    if (!fs::exists(path)) throw DataError(where + ": missing image " + path.string());
    DatasetEntry e;
    e.id = file;
    try {
      e.label = scale_mos({mos, mos_min, mos_max});
    } catch (const ConfigError& err) {
      throw DataError(where + ": " + err.what());
    }
    e.features = extract_views(load_image(path), views);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("MOS file has no data rows: " + mos_file.string());
  return DatasetHandle(mos_file.stem().string(), Provenance::kExternal, std::move(entries));
}

}  // namespace iqa
