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
#include <exception>
#include <fstream>
#include <set>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"
#include "json.hpp"

namespace iqa {

namespace fs = std::filesystem;

std::uint64_t corpus_item_seed(std::uint64_t seed, std::string_view source, int model, int level) {
  std::uint64_t h = combine_seed(seed, fnv1a(source));
  h = combine_seed(h, static_cast<std::uint64_t>(model));
  return combine_seed(h, static_cast<std::uint64_t>(level));
}

std::string manifest_line(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["source"] = e.source;
  j["output"] = e.output;
  j["model"] = e.model;
  j["level"] = e.level;
  j["label"] = e.label;
  j["class_index"] = e.class_index;
  j["seed"] = e.seed;
  return j.dump();
}

ManifestEntry parse_manifest_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ManifestEntry e;
    e.source = j.at("source").get<std::string>();
    e.output = j.at("output").get<std::string>();
    e.model = j.at("model").get<int>();
    e.level = j.at("level").get<int>();
    e.label = j.at("label").get<std::string>();
    e.class_index = j.at("class_index").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
    const PseudoLabel expect = pseudo_label({e.model, e.level, 0});
    if (expect.text != e.label || expect.class_index != e.class_index) {
      throw DataError("manifest label does not match model/level: " + std::string(line));
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed manifest line: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw DataError(std::string("manifest entry out of range: ") + ex.what());
  }
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_manifest_line(line));
  }
  return out;
}

namespace {

std::vector<int> normalized_subset(std::vector<int> values, int max_value, const char* what) {
  if (values.empty()) {
    for (int v = 1; v <= max_value; ++v) values.push_back(v);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (int v : values) {
    if (v < 1 || v > max_value) throw ConfigError(std::string(what) + " out of range: " + std::to_string(v));
  }
  return values;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm";
}

}  // namespace

std::vector<ManifestEntry> generate_corpus(const CorpusRequest& request, const SeveritySchedule& schedule) {
  if (!fs::is_directory(request.pristine_dir)) {
    throw DataError("pristine directory does not exist: " + request.pristine_dir.string());
  }
  if (request.format != "png" && request.format != "ppm") throw ConfigError("corpus format must be png or ppm");
  const auto models = normalized_subset(request.models, kDistortionModels, "model");
  const auto levels = normalized_subset(request.levels, kSeverityLevels, "level");
  for (int m : models) {
    if (!schedule.has(m)) throw ConfigError("severity schedule has no entry for model " + std::to_string(m));
  }

  std::vector<fs::path> sources;
  for (const auto& entry : fs::directory_iterator(request.pristine_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) sources.push_back(entry.path());
  }
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw DataError("no decodable images in " + request.pristine_dir.string());
  std::set<std::string> stems;
  for (const auto& s : sources) {
    if (!stems.insert(s.stem().string()).second) throw DataError("duplicate image stem: " + s.stem().string());
  }

  std::error_code ec;
  fs::create_directories(request.out_dir, ec);
  if (ec || !fs::is_directory(request.out_dir)) throw DataError("cannot create output directory: " + request.out_dir.string());

  std::vector<ImageTensor> images;
  images.reserve(sources.size());
  for (const auto& s : sources) images.push_back(load_image(s));

  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (int m : models) {
      for (int l : levels) {
        ManifestEntry e;
        e.source = sources[i].string();
        const std::string name = sources[i].filename().string();
        e.output = sources[i].stem().string() + "_m" + std::to_string(m) + "_l" + std::to_string(l) + "." +
                   request.format;
        e.model = m;
        e.level = l;
        const PseudoLabel label = pseudo_label({m, l, 0});
        e.label = label.text;
        e.class_index = label.class_index;
        e.seed = corpus_item_seed(request.seed, name, m, l);
        entries.push_back(std::move(e));
      }
    }
  }

  const std::size_t per_image = models.size() * levels.size();
  std::vector<std::exception_ptr> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < entries.size(); ++k) {
    try {
      const ManifestEntry& e = entries[k];
      const ImageTensor out = apply_distortion(images[k / per_image], {e.model, e.level, e.seed}, schedule);
      save_image(out, request.out_dir / e.output);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const fs::path manifest = request.out_dir / "manifest.jsonl";
  std::ofstream out(manifest);
  if (!out) throw DataError("cannot write manifest: " + manifest.string());
  for (const auto& e : entries) out << manifest_line(e) << '\n';
  if (!out) throw DataError("manifest write failed: " + manifest.string());
  return entries;
}

}  // namespace iqa
