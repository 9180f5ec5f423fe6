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

// iqa: command-line front end for corpus generation, training, evaluation
// and ablation. Exit codes: 0 success, 2 config error, 3 data error,
// 4 numeric failure, 1 anything else.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/format.hpp"
#include "iqa/harness.hpp"
#include "iqa/parallel.hpp"
#include "iqa/qaloss.hpp"
#include "iqa/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace iqa;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::vector<std::string> configs;
  std::string out = "out";
  int threads = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Config files are classified by shape: a severity schedule has numeric
// model keys (or a single "schedule" key), a flat loss file has only loss
// keys, and anything else is a pipeline config.
struct Settings {
  SeveritySchedule schedule = SeveritySchedule::defaults();
  PipelineConfig pipeline;
};

Settings load_settings(const Globals& g) {
  Settings s;
  for (const std::string& file : g.configs) {
    const std::string text = read_file(file);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(file + ": " + e.what());
    }
    if (!j.is_object() || j.empty()) throw ConfigError(file + ": expected a non-empty JSON object");
    bool numeric = true;
    bool loss_only = true;
    for (const auto& [key, value] : j.items()) {
      numeric = numeric && all_digits(key);
      loss_only = loss_only && (key == "lambda1" || key == "lambda2" || key == "temperature" || key == "mse");
    }
    if (j.contains("schedule") && j.size() == 1) {
      s.schedule = SeveritySchedule::from_json(j.at("schedule").dump());
    } else if (numeric) {
      s.schedule = SeveritySchedule::from_json(text);
    } else if (loss_only) {
      s.pipeline = PipelineConfig::from_json(nlohmann::json{{"loss", j}}.dump(), s.pipeline);
    } else {
      s.pipeline = PipelineConfig::from_json(text, s.pipeline);
    }
  }
  s.schedule.validate();
  s.pipeline.seed = g.seed;
  s.pipeline.validate();
  return s;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      try {
        out.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError("expected a comma-separated integer list, got '" + text + "'");
      }
    }
  }
  return out;
}

// A dataset path is either a corpus manifest (.jsonl, labels from the
// severity level) or a two-column MOS file (.csv, images beside it).
struct DatasetSource {
  double mos_min = std::numeric_limits<double>::quiet_NaN();
  double mos_max = std::numeric_limits<double>::quiet_NaN();
  std::string images;
  double jitter = 0.02;
};

DatasetHandle open_dataset(const fs::path& path, const DatasetSource& src, const Settings& s) {
  const FeatureViews& views = s.pipeline.views;
  if (path.extension() == ".jsonl") {
    const std::string name = path.parent_path().filename().string();
    return dataset_from_manifest(name.empty() ? path.stem().string() : name, path, views, src.jitter,
                                 s.pipeline.seed);
  }
  if (path.extension() == ".csv") {
    if (std::isnan(src.mos_min) || std::isnan(src.mos_max)) {
      throw ConfigError("MOS file " + path.string() + " needs --mos-min and --mos-max");
    }
    const fs::path dir = src.images.empty() ? path.parent_path() : fs::path(src.images);
    return import_external(path, dir, src.mos_min, src.mos_max, views);
  }
  throw ConfigError("dataset must be a .jsonl manifest or a .csv MOS file: " + path.string());
}

void add_source_options(CLI::App* cmd, DatasetSource& src) {
  cmd->add_option("--mos-min", src.mos_min, "Lowest MOS of an external dataset's scale");
  cmd->add_option("--mos-max", src.mos_max, "Highest MOS of an external dataset's scale");
  cmd->add_option("--images", src.images, "Image directory of an external dataset (default: beside the CSV)");
  cmd->add_option("--jitter", src.jitter, "Label jitter for generated corpora")->capture_default_str();
}

std::unique_ptr<ClassifySet> open_corpus(const std::string& manifest, const Settings& s) {
  if (!s.pipeline.pretrain) return nullptr;
  if (manifest.empty()) throw ConfigError("pre-training is enabled: pass --corpus <manifest.jsonl>");
  return std::make_unique<ClassifySet>(pretrain_set_from_manifest(manifest, s.pipeline.views));
}

std::string loss_curve(const TrainReport& r) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const EpochRecord& e : r.epochs) {
    xs.push_back(e.epoch);
    ys.push_back(e.val_loss);
  }
  return plot_data(xs, ys);
}

void write_eval_outputs(const fs::path& out, const std::vector<EvalReport>& reports, const std::string& stem) {
  write_text(out / (stem + ".csv"), reports_csv(reports));
  std::ostringstream timing;
  timing << "dataset,variant,seconds\n";
  for (const EvalReport& r : reports) {
    const std::string tag = r.variant == "baseline" ? stem : stem + "_" + r.variant;
    write_text(out / (tag + "_residuals.csv"), residuals_csv(r));
    write_text(out / (tag + "_scatter.dat"), plot_data(r.predictions, r.labels));
    timing << r.dataset << ',' << r.variant << ',' << r.seconds << '\n';
  }
  write_text(out / (stem + "_timing.csv"), timing.str());
}

void print_reports(const std::vector<EvalReport>& reports) {
  for (const EvalReport& r : reports) {
    std::printf("%-28s plcc %.4f  srocc %.4f  rmse %.4f  %s\n",
                (r.variant == "baseline" ? r.dataset : r.dataset + "[" + r.variant + "]").c_str(), r.plcc, r.srocc,
                r.rmse, r.fingerprint.c_str());
  }
}

void save_pipeline(const TrainedPipeline& p, const fs::path& out) {
  write_text(out / "pipeline.json", p.config.to_json() + "\n");
  write_text(out / "meta.json", p.meta.to_json() + "\n");
  for (std::size_t i = 0; i < p.learners.size(); ++i) {
    const std::string tag = "learner_" + std::to_string(i + 1);
    save_params(p.learners[i], out / (tag + ".mlp"));
    write_text(out / (tag + "_finetune.csv"), p.finetune_reports[i].to_csv());
    write_text(out / (tag + "_finetune_loss.dat"), loss_curve(p.finetune_reports[i]));
  }
}

// Base predictions on the meta-fit rows, as input for `meta-fit`.
std::string meta_inputs_csv(const TrainedPipeline& p, const DatasetHandle& train) {
  const std::vector<std::size_t> rows = meta_rows(p.config, train.size());
  const Matrix all = train.features();
  Matrix held(rows.size(), all.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = all.row(rows[r]);
    std::copy(src.begin(), src.end(), held.row(r).begin());
  }
  const std::vector<ScoreVector> cols = p.base_predictions(held);
  const ScoreVector labels = train.labels();
  std::ostringstream out;
  for (std::size_t c = 0; c < cols.size(); ++c) out << 'P' << c + 1 << ',';
  out << "target\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const ScoreVector& col : cols) out << shortest(col[r]) << ',';
    out << shortest(labels[rows[r]]) << '\n';
  }
  return out.str();
}

std::vector<double> parse_csv_row(const std::string& line, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw DataError(where + ": '" + cell + "' is not a number");
    }
  }
  return out;
}

// Header row, then one row per sample: P1..Pk then the target column.
PredictionMatrix read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + " is empty");
  PredictionMatrix m;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<double> v = parse_csv_row(line, path.filename().string() + " row " + std::to_string(row));
    if (v.size() < 2) throw DataError(path.filename().string() + " row " + std::to_string(row) + ": too few columns");
    if (m.columns.empty()) m.columns.resize(v.size() - 1);
    if (v.size() != m.columns.size() + 1) {
      throw DataError(path.filename().string() + " row " + std::to_string(row) + ": ragged row");
    }
    for (std::size_t c = 0; c + 1 < v.size(); ++c) m.columns[c].push_back(v[c]);
    m.target.push_back(v.back());
  }
  return m;
}

// Either "lambda1,lambda2,loss" rows or a 4 x 4 block with one row per
// lambda2 and one column per lambda1. A header line is skipped.
std::array<std::array<double, 4>, 4> read_grid_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    if (n == 1 && std::any_of(line.begin(), line.end(), [](unsigned char c) { return std::isalpha(c); })) continue;
    rows.push_back(parse_csv_row(line, path.filename().string() + " row " + std::to_string(n)));
  }
  std::array<std::array<double, 4>, 4> table{};
  auto index = [](double lambda) {
    for (std::size_t i = 0; i < kLambdaGrid.size(); ++i) {
      if (lambda == kLambdaGrid[i]) return i;
    }
    throw DataError("lambda " + std::to_string(lambda) + " is not on the grid");
  };
  if (rows.size() == 16 && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.size() == 3; })) {
    std::array<std::array<bool, 4>, 4> seen{};
    for (const auto& r : rows) {
      const std::size_t i = index(r[0]);
      const std::size_t j = index(r[1]);
      if (seen[i][j]) throw DataError("grid cell listed twice");
      seen[i][j] = true;
      table[i][j] = r[2];
    }
  } else if (rows.size() == 4 && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.size() == 4; })) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t i = 0; i < 4; ++i) table[i][j] = rows[j][i];
    }
  } else {
    throw DataError(path.string() + ": expected 16 'lambda1,lambda2,loss' rows or a 4 x 4 block");
  }
  return table;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-reference image quality assessment toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--config", g.configs, "JSON config files (schedule, loss or pipeline), applied in order");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "OpenMP threads (0: runtime default)");

  // distort
  auto* distort = app.add_subcommand("distort", "Apply one distortion to one image");
  std::string d_in;
  std::string d_out;
  int d_model = 0;
  int d_level = 0;
  distort->add_option("--input", d_in, "Pristine image (PNG or PPM)")->required();
  distort->add_option("--output", d_out, "Output image (.png or .ppm)")->required();
  distort->add_option("--model", d_model, "Distortion model 1..25")->required();
  distort->add_option("--level", d_level, "Severity level 1..5")->required();

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Generate a distorted corpus and its manifest");
  std::string c_pristine;
  int c_scenes = 0;
  int c_size = 64;
  std::string c_models;
  std::string c_levels;
  std::string c_format = "png";
  corpus->add_option("--pristine", c_pristine, "Directory of pristine images");
  corpus->add_option("--scenes", c_scenes, "Synthesize this many pristine scenes instead");
  corpus->add_option("--size", c_size, "Side of synthesized scenes")->capture_default_str();
  corpus->add_option("--models", c_models, "Comma-separated model ids (default: all 25)");
  corpus->add_option("--levels", c_levels, "Comma-separated levels (default: 1..5)");
  corpus->add_option("--format", c_format, "png or ppm")->capture_default_str();

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "Pre-train every base learner as a distortion classifier");
  std::string p_corpus;
  pretrain->add_option("--corpus", p_corpus, "Corpus manifest (.jsonl)")->required();

  // train
  auto* train = app.add_subcommand("train", "Fine-tune base learners and fit the meta-learner");
  std::string t_dataset;
  std::string t_corpus;
  std::string t_pretrained;
  DatasetSource t_src;
  train->add_option("--dataset", t_dataset, "Training dataset (.jsonl manifest or .csv MOS file)")->required();
  train->add_option("--corpus", t_corpus, "Pre-training corpus manifest");
  train->add_option("--pretrained", t_pretrained, "Directory written by `pretrain` (skips pre-training)");
  add_source_options(train, t_src);

  // grid-search
  auto* grid = app.add_subcommand("grid-search", "Search the 4 x 4 lambda grid of the quality-aware loss");
  std::string gs_values;
  std::string gs_dataset;
  DatasetSource gs_src;
  grid->add_option("--values", gs_values, "Precomputed loss values (CSV) instead of training");
  grid->add_option("--dataset", gs_dataset, "Dataset whose validation loss scores each cell");
  add_source_options(grid, gs_src);

  // meta-fit
  auto* metafit = app.add_subcommand("meta-fit", "Stepwise linear regression over base predictions");
  std::string m_predictions;
  double m_threshold = 0.05;
  metafit->add_option("--predictions", m_predictions, "CSV: header, then P1..Pk,target per row")->required();
  metafit->add_option("--threshold", m_threshold, "Coefficient threshold")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Holdout or cross-dataset evaluation");
  bool e_holdout = false;
  bool e_cross = false;
  std::string e_dataset;
  std::string e_train_ds;
  std::string e_test_ds;
  std::string e_corpus;
  double e_fraction = 0.8;
  DatasetSource e_src;
  auto* holdout_flag = eval->add_flag("--holdout", e_holdout, "Seeded train/test split of one dataset");
  auto* cross_flag = eval->add_flag("--cross", e_cross, "Train on one dataset, test on another");
  holdout_flag->excludes(cross_flag);
  eval->add_option("--dataset", e_dataset, "Dataset for --holdout");
  eval->add_option("--train-ds", e_train_ds, "Training dataset for --cross");
  eval->add_option("--test-ds", e_test_ds, "Test dataset for --cross");
  eval->add_option("--corpus", e_corpus, "Pre-training corpus manifest");
  eval->add_option("--train-fraction", e_fraction, "Holdout train fraction")->capture_default_str();
  add_source_options(eval, e_src);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Baseline plus one report per toggle");
  std::string a_dataset;
  std::string a_corpus;
  std::vector<std::string> a_toggles;
  double a_fraction = 0.8;
  DatasetSource a_src;
  ablate->add_option("--dataset", a_dataset, "Dataset, split by --seed")->required();
  ablate->add_option("--corpus", a_corpus, "Pre-training corpus manifest");
  ablate->add_option("--toggle", a_toggles, "NO_META, MSE_ONLY_LOSS, NO_PRETRAIN or DROP_BASE(i); repeatable");
  ablate->add_option("--train-fraction", a_fraction, "Holdout train fraction")->capture_default_str();
  add_source_options(ablate, a_src);

  // import
  auto* import = app.add_subcommand("import", "Validate an external MOS file and write rescaled labels");
  std::string i_mos;
  DatasetSource i_src;
  import->add_option("--mos", i_mos, "Two-column CSV with a header: filename,mos")->required();
  add_source_options(import, i_src);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (g.threads > 0) set_num_threads(g.threads);
    const Settings s = load_settings(g);
    const fs::path out = g.out;

    if (*distort) {
      const DistortionSpec spec{d_model, d_level, corpus_item_seed(g.seed, fs::path(d_in).filename().string(),
                                                                   d_model, d_level)};
      validate(spec);
      save_image(apply_distortion(load_image(d_in), spec, s.schedule), d_out);
      std::printf("%s -> %s (%s)\n", d_in.c_str(), d_out.c_str(), pseudo_label(spec).text.c_str());
    } else if (*corpus) {
      if (c_pristine.empty() == (c_scenes == 0)) throw ConfigError("corpus needs exactly one of --pristine, --scenes");
      CorpusRequest req;
      req.out_dir = out;
      req.seed = g.seed;
      req.format = c_format;
      req.models = parse_int_list(c_models);
      req.levels = parse_int_list(c_levels);
      if (c_scenes > 0) {
        req.pristine_dir = out / "pristine";
        fs::create_directories(req.pristine_dir);
        for (int i = 0; i < c_scenes; ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "scene_%03d.png", i);
          save_image(synthesize_scene(c_size, c_size, combine_seed(g.seed, static_cast<std::uint64_t>(i))),
                     req.pristine_dir / name);
        }
      } else {
        req.pristine_dir = c_pristine;
      }
      const auto entries = generate_corpus(req, s.schedule);
      std::printf("%zu images, manifest %s\n", entries.size(), (out / "manifest.jsonl").string().c_str());
    } else if (*pretrain) {
      const ClassifySet set = pretrain_set_from_manifest(p_corpus, s.pipeline.views);
      const std::vector<TrainResult> results = pretrain_learners(set, s.pipeline);
      for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string tag = "learner_" + std::to_string(i + 1);
        save_params(results[i].params, out / (tag + ".classifier.mlp"));
        write_text(out / (tag + "_pretrain.csv"), results[i].report.to_csv());
        write_text(out / (tag + "_pretrain_loss.dat"), loss_curve(results[i].report));
        std::printf("%s: best epoch %d, validation loss %.6f\n", tag.c_str(), results[i].report.best_epoch,
                    results[i].report.best_val_loss);
      }
      write_text(out / "pipeline.json", s.pipeline.to_json() + "\n");
    } else if (*train) {
      const DatasetHandle ds = open_dataset(t_dataset, t_src, s);
      std::vector<TrainResult> loaded;
      std::unique_ptr<ClassifySet> set;
      if (s.pipeline.pretrain && !t_pretrained.empty()) {
        for (std::size_t i = 0; i < s.pipeline.learners.size(); ++i) {
          loaded.push_back({load_params(fs::path(t_pretrained) / ("learner_" + std::to_string(i + 1) + ".classifier.mlp")), {}});
        }
      } else {
        set = open_corpus(t_corpus, s);
      }
      const TrainedPipeline p = train_pipeline(ds, set.get(), s.pipeline, loaded.empty() ? nullptr : &loaded);
      save_pipeline(p, out);
      if (s.pipeline.meta) write_text(out / "meta_inputs.csv", meta_inputs_csv(p, ds));
      std::printf("%s\n", s.pipeline.meta ? p.meta.equation().c_str() : "Y = mean(P_i(X))");
    } else if (*grid) {
      GridSearchResult result;
      if (!gs_values.empty()) {
        const auto table = read_grid_values(gs_values);
        result = grid_search([&](double l1, double l2) {
          const auto at = [](double l) { return static_cast<std::size_t>(std::find(kLambdaGrid.begin(), kLambdaGrid.end(), l) - kLambdaGrid.begin()); };
          return table[at(l1)][at(l2)];
        });
      } else {
        if (gs_dataset.empty()) throw ConfigError("grid-search needs --values or --dataset");
        const DatasetHandle ds = open_dataset(gs_dataset, gs_src, s);
        // Each cell fine-tunes the first base learner from random init and
        // scores it by its best validation loss under that cell's weights.
        PipelineConfig base = s.pipeline;
        base.learners = {base.learners.front()};
        base.pretrain = false;
        base.meta = false;
        result = grid_search([&](double l1, double l2) {
          PipelineConfig c = base;
          c.loss.lambda1 = l1;
          c.loss.lambda2 = l2;
          return train_pipeline(ds, nullptr, c).finetune_reports.front().best_val_loss;
        });
      }
      write_text(out / "grid_search.csv", grid_csv(result));
      std::printf("best lambda1 %s lambda2 %s loss %s\n", shortest(result.best_lambda1).c_str(),
                  shortest(result.best_lambda2).c_str(), shortest(result.best_value).c_str());
    } else if (*metafit) {
      const MetaModel m = slr_fit(read_predictions(m_predictions), m_threshold);
      write_text(out / "meta.json", m.to_json() + "\n");
      std::ostringstream trace;
      trace << "round,index,coef,r_squared\n";
      for (std::size_t r = 0; r < m.trace.size(); ++r) {
        trace << r + 1 << ',' << m.trace[r].index << ',' << shortest(m.trace[r].coef_at_acceptance) << ','
              << shortest(m.trace[r].r_squared) << '\n';
      }
      write_text(out / "meta_trace.csv", trace.str());
      std::printf("%s\nR^2 %.6f\n", m.equation().c_str(), m.r_squared);
    } else if (*eval) {
      if (!e_holdout && !e_cross) throw ConfigError("eval needs --holdout or --cross");
      EvalReport r;
      if (e_holdout) {
        if (e_dataset.empty()) throw ConfigError("eval --holdout needs --dataset");
        const DatasetHandle ds = open_dataset(e_dataset, e_src, s);
        const auto set = open_corpus(e_corpus, s);
        const SplitResult sp = split(ds, {e_fraction, g.seed});
        r = eval_holdout(sp.train, sp.test, set.get(), s.pipeline);
      } else {
        if (e_train_ds.empty() || e_test_ds.empty()) throw ConfigError("eval --cross needs --train-ds and --test-ds");
        const DatasetHandle a = open_dataset(e_train_ds, e_src, s);
        const DatasetHandle b = open_dataset(e_test_ds, e_src, s);
        const auto set = open_corpus(e_corpus, s);
        r = eval_cross_dataset(a, b, set.get(), s.pipeline);
      }
      write_eval_outputs(out, {r}, "report");
      print_reports({r});
    } else if (*ablate) {
      std::vector<AblationToggle> toggles;
      for (const std::string& t : a_toggles) toggles.push_back(AblationToggle::parse(t));
      const DatasetHandle ds = open_dataset(a_dataset, a_src, s);
      const auto set = open_corpus(a_corpus, s);
      const SplitResult sp = split(ds, {a_fraction, g.seed});
      const std::vector<EvalReport> reports = run_ablation(sp.train, sp.test, set.get(), s.pipeline, toggles);
      write_eval_outputs(out, reports, "ablation");
      print_reports(reports);
    } else if (*import) {
      const DatasetHandle ds = open_dataset(i_mos, i_src, s);
      std::ostringstream labels;
      labels << "id,label\n";
      const ScoreVector y = ds.labels();
      for (std::size_t i = 0; i < ds.size(); ++i) labels << ds.id(i) << ',' << shortest(y[i]) << '\n';
      write_text(out / (ds.name() + "_labels.csv"), labels.str());
      std::printf("%s: %zu images\n", ds.name().c_str(), ds.size());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "iqa: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
