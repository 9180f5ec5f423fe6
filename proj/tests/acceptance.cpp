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


// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "iqa/distortion.hpp"
#include "iqa/harness.hpp"
#include "iqa/image.hpp"
#include "iqa/metalearner.hpp"
#include "iqa/metrics.hpp"
#include "iqa/parallel.hpp"
#include "iqa/qaloss.hpp"
#include "iqa/rng.hpp"

namespace fs = std::filesystem;
using namespace iqa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 1. Analytic loss gradient against central differences of the loss value.
Outcome gradient_fidelity() {
  Rng rng(1);
  const std::size_t sizes[] = {4, 16, 64};
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = sizes[trial % 3];
    std::vector<double> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = uniform01(rng);
      p[i] = uniform01(rng);
    }
    const LossConfig cfg{uniform_between(rng, 0.0, 1.0), uniform_between(rng, 0.0, 1.0), uniform_between(rng, 0.1, 2.0)};
    const auto g = qa_loss(t, p, cfg).grad;
    for (std::size_t i = 0; i < n; ++i) {
      const double keep = p[i];
      p[i] = keep + 1e-5;
      const double up = qa_loss(t, p, cfg).value;
      p[i] = keep - 1e-5;
      const double down = qa_loss(t, p, cfg).value;
      p[i] = keep;
      const double fd = (up - down) / 2e-5;
      const double scale = std::max(std::abs(fd), std::abs(g[i]));
      worst = std::max(worst, scale < 1e-8 ? std::abs(fd - g[i]) : std::abs(fd - g[i]) / scale);
    }
  }
  return {worst <= 1e-4, fmt("max relative error %.2e", worst)};
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Sort, then give each run of equal values the mean of its positions.
std::vector<double> sorted_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && x[order[hi + 1]] == x[order[lo]]) ++hi;
    for (std::size_t k = lo; k <= hi; ++k) r[order[k]] = (static_cast<double>(lo + hi) + 2.0) / 2.0;
    lo = hi + 1;
  }
  return r;
}

// 2. plcc and srocc against definition-level oracles.
Outcome metric_oracles() {
  Rng rng(2);
  double worst = 0.0;
  int checked = 0;
  while (checked < 1000) {
    const std::size_t n = 2 + uniform_below(rng, 199);
    const bool ties = checked % 2 == 1;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ties ? static_cast<double>(uniform_below(rng, 6)) : uniform_between(rng, -5.0, 5.0);
      y[i] = ties ? static_cast<double>(uniform_below(rng, 6)) : uniform_between(rng, -5.0, 5.0);
    }
    const bool flat_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const bool flat_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (flat_x || flat_y) continue;
    worst = std::max(worst, std::abs(plcc(x, y) - pearson_oracle(x, y)));
    worst = std::max(worst, std::abs(srocc(x, y) - pearson_oracle(sorted_ranks(x), sorted_ranks(y))));
    ++checked;
  }
  return {worst <= 1e-10, fmt("max abs error %.2e over 1000 vector pairs", worst)};
}

// 3. Published loss grid, rows lambda2 = 1/4..1, columns lambda1 = 1/4..1.
Outcome grid_reproduction() {
  const double table[4][4] = {{0.042, 0.036, 0.037, 0.043},
                              {0.038, 0.032, 0.035, 0.039},
                              {0.041, 0.034, 0.033, 0.037},
                              {0.045, 0.039, 0.040, 0.041}};
  const auto index = [](double l) { return static_cast<int>(std::lround(l * 4.0)) - 1; };
  const GridSearchResult r = grid_search([&](double l1, double l2) { return table[index(l2)][index(l1)]; });
  const bool ok = r.best_lambda1 == 0.5 && r.best_lambda2 == 0.5 && r.best_value == 0.032;
  return {ok, "best (" + fmt("%g", r.best_lambda1) + ", " + fmt("%g", r.best_lambda2) + ") value " + fmt("%g", r.best_value)};
}

// 4. Stepwise regression on planted combinations.
Outcome meta_recovery() {
  Rng rng(4);
  PredictionMatrix m;
  for (int k = 0; k < 5; ++k) {
    ScoreVector c(200);
    for (double& v : c) v = uniform01(rng);
    m.columns.push_back(c);
  }
  m.target.resize(200);
  for (std::size_t i = 0; i < 200; ++i) m.target[i] = 0.6 * m.columns[0][i] + 0.4 * m.columns[1][i];
  const MetaModel fit = slr_fit(m);
  std::map<int, double> coef;
  for (const MetaTerm& t : fit.terms) coef[t.index] = t.coef;
  const bool recovered = coef.size() == 2 && coef.count(1) && coef.count(2) && std::abs(coef[1] - 0.6) <= 1e-6 &&
                         std::abs(coef[2] - 0.4) <= 1e-6;

  PredictionMatrix small = m;
  for (std::size_t i = 0; i < 200; ++i) small.target[i] = 0.97 * m.columns[0][i] + 0.03 * m.columns[1][i];
  const MetaModel fit2 = slr_fit(small);
  const bool excluded = fit2.terms.size() == 1 && fit2.terms[0].index == 1;
  return {recovered && excluded, "selected " + std::to_string(fit.terms.size()) + " of 5 columns; 0.03 column " +
                                     (excluded ? "excluded" : "kept")};
}

// 5. Published meta equation.
Outcome published_equation() {
  MetaModel m;
  m.intercept = 0.05;
  m.terms = {{7, 0.40}, {1, 0.35}, {14, 0.15}, {10, 0.10}};
  const double zero = meta_predict(m, {{7, 0.0}, {1, 0.0}, {14, 0.0}, {10, 0.0}});
  const double one = meta_predict(m, {{7, 1.0}, {1, 1.0}, {14, 1.0}, {10, 1.0}});
  const bool ok = std::abs(zero - 0.05) <= 1e-12 && std::abs(one - 1.05) <= 1e-12;
  return {ok, "zeros -> " + fmt("%.15g", zero) + ", ones -> " + fmt("%.15g", one)};
}

double image_mse(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::pow(static_cast<double>(a.data()[i]) - b.data()[i], 2);
  return s / static_cast<double>(a.data().size());
}

// 6. All 125 pairs on ten 256x256 scenes; reruns byte-identical.
Outcome distortion_engine() {
  const SeveritySchedule schedule = SeveritySchedule::defaults();
  const fs::path root = fs::temp_directory_path() / "iqa_acceptance_c6";
  fs::remove_all(root);
  fs::create_directories(root / "pristine");
  std::vector<ImageTensor> scenes;
  for (int i = 0; i < 10; ++i) {
    scenes.push_back(synthesize_scene(256, 256, static_cast<std::uint64_t>(i)));
    save_image(scenes.back(), root / "pristine" / ("scene_" + std::to_string(i) + ".png"));
  }
  int invalid = 0;
  int non_monotone = 0;
  const int deterministic[] = {2, 9, 15, 16, 21, 23};
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    for (int model = 1; model <= kDistortionModels; ++model) {
      const bool check_mse = std::find(std::begin(deterministic), std::end(deterministic), model) != std::end(deterministic);
      double last = -1.0;
      for (int level = 1; level <= kSeverityLevels; ++level) {
        const ImageTensor out = apply_distortion(scenes[i], {model, level, combine_seed(i, static_cast<std::uint64_t>(model * 8 + level))}, schedule);
        const bool ok = out.height() == 256 && out.width() == 256 &&
                        std::all_of(out.data().begin(), out.data().end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
        invalid += !ok;
        if (check_mse) {
          const double mse = image_mse(out, scenes[i]);
          non_monotone += mse < last;
          last = mse;
        }
      }
    }
  }
  CorpusRequest req;
  req.pristine_dir = root / "pristine";
  req.seed = 6;
  req.out_dir = root / "a";
  const auto first = generate_corpus(req, schedule);
  req.out_dir = root / "b";
  const auto second = generate_corpus(req, schedule);
  int differing = first.size() == 1250 && second == first ? 0 : 1;
  for (const ManifestEntry& e : first) differing += slurp(root / "a" / e.output) != slurp(root / "b" / e.output);
  differing += slurp(root / "a" / "manifest.jsonl") != slurp(root / "b" / "manifest.jsonl");
  fs::remove_all(root);
  const bool ok = invalid == 0 && non_monotone == 0 && differing == 0;
  return {ok, std::to_string(invalid) + " invalid outputs, " + std::to_string(non_monotone) + " MSE inversions, " +
                  std::to_string(differing) + " differing rerun files"};
}

struct SeedSetup {
  DatasetHandle dataset;
  ClassifySet corpus;
  SplitResult parts;
};

SeedSetup seed_setup(std::uint64_t seed, const PipelineConfig& cfg) {
  PlantedSpec spec;
  spec.seed = 100 + seed;
  DatasetHandle ds = make_planted_dataset("planted", spec, cfg.views);
  spec.seed = 900 + seed;
  ClassifySet corpus = make_pretrain_set(spec, cfg.views);
  SplitResult parts = split(ds, {0.8, seed});
  return {std::move(ds), std::move(corpus), std::move(parts)};
}

// 7. Full pipeline on the planted law against the uniform-average ablation.
Outcome end_to_end() {
  std::vector<double> base, averaged;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PipelineConfig cfg;
    cfg.seed = seed;
    const SeedSetup s = seed_setup(seed, cfg);
    const auto reps = run_ablation(s.parts.train, s.parts.test, &s.corpus, cfg, {AblationToggle::parse("NO_META")});
    base.push_back(reps[0].srocc);
    averaged.push_back(reps[1].srocc);
    per_seed += (seed > 1 ? " " : "") + fmt("%.4f", reps[0].srocc) + "/" + fmt("%.4f", reps[1].srocc);
  }
  const bool floor = *std::min_element(base.begin(), base.end()) >= 0.9;
  const bool beats = median(base) > median(averaged);
  return {floor && beats, "median SROCC " + fmt("%.4f", median(base)) + " vs NO_META " + fmt("%.4f", median(averaged)) +
                              " (per seed " + per_seed + ")"};
}

// 8. Epochs for the pretrained first learner to reach the random-init run's
// best validation loss, against the random-init run's own best epoch.
Outcome transfer_direction() {
  std::vector<double> diff;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PipelineConfig cfg;
    cfg.seed = seed;
    const SeedSetup s = seed_setup(seed, cfg);
    PipelineConfig one = cfg;
    one.learners = {cfg.learners[0]};
    const TrainedPipeline pre = train_pipeline(s.parts.train, &s.corpus, one);
    one.pretrain = false;
    const TrainedPipeline rnd = train_pipeline(s.parts.train, nullptr, one);
    const TrainReport& r = rnd.finetune_reports[0];
    const int reach = pre.finetune_reports[0].epochs_to_reach(r.best_val_loss);
    const double reach_epochs = reach < 0 ? std::numeric_limits<double>::infinity() : reach;
    diff.push_back(reach_epochs - r.best_epoch);
    per_seed += (seed > 1 ? " " : "") + std::to_string(reach) + "/" + std::to_string(r.best_epoch);
  }
  return {median(diff) <= 0.0, "pretrained/random epochs per seed " + per_seed};
}

// 9. Every seeded stage twice at one thread and once at four.
std::string stage_outputs() {
  std::ostringstream out;
  const SeveritySchedule schedule = SeveritySchedule::defaults();
  const ImageTensor scene = synthesize_scene(96, 96, 9);
  for (int model = 1; model <= kDistortionModels; ++model) {
    const ImageTensor d = apply_distortion(scene, {model, 3, 99}, schedule);
    out.write(reinterpret_cast<const char*>(d.data().data()), static_cast<std::streamsize>(d.data().size() * sizeof(float)));
  }
  PipelineConfig cfg;
  cfg.pretrain_train.max_epochs = 10;
  cfg.finetune_train.max_epochs = 30;
  cfg.seed = 3;
  PlantedSpec spec;
  spec.scenes = 12;
  spec.seed = 33;
  const DatasetHandle ds = make_planted_dataset("planted", spec, cfg.views);
  spec.seed = 34;
  const ClassifySet corpus = make_pretrain_set(spec, cfg.views);
  out << ds.content_hash() << '\n';
  const SplitResult parts = split(ds, {0.8, 3});
  for (const auto& id : parts.test.ids()) out << id << '\n';
  for (const TrainResult& r : pretrain_learners(corpus, cfg)) {
    const auto bytes = serialize_params(r.params);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out << r.report.to_csv();
  }
  const TrainedPipeline p = train_pipeline(parts.train, &corpus, cfg);
  for (const ModelParams& m : p.learners) {
    const auto bytes = serialize_params(m);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  for (const TrainReport& r : p.finetune_reports) out << r.to_csv();
  out << p.meta.to_json();
  const auto reps = run_ablation(parts.train, parts.test, &corpus, cfg,
                                 {AblationToggle::parse("NO_META"), AblationToggle::parse("MSE_ONLY_LOSS")});
  out << reports_csv(reps);
  for (const EvalReport& r : reps) out << residuals_csv(r);
  return out.str();
}

Outcome determinism() {
  std::string a, b, c;
  {
    ScopedThreads t(1);
    a = stage_outputs();
    b = stage_outputs();
  }
  {
    ScopedThreads t(4);
    c = stage_outputs();
  }
  const bool ok = a == b && a == c;
  return {ok, std::to_string(a.size()) + " bytes; rerun " + (a == b ? "identical" : "differs") + ", 4 threads " +
                  (a == c ? "identical" : "differs")};
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity", 10.0, gradient_fidelity},
      {2, "metric oracles", 5.0, metric_oracles},
      {3, "grid-search reproduction", 0.0, grid_reproduction},
      {4, "meta-learner recovery", 1.0, meta_recovery},
      {5, "meta equation evaluation", 0.0, published_equation},
      {6, "distortion engine", 120.0, distortion_engine},
      {7, "end-to-end toy pipeline", 600.0, end_to_end},
      {8, "transfer-learning direction", 0.0, transfer_direction},
      {9, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%g", c.budget_seconds) + " s budget";
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
