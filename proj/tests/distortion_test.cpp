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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/parallel.hpp"

namespace iqa {
namespace {

namespace fs = std::filesystem;

double mse(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.data().size());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "iqa_distortion_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Independent 2-D Gaussian blur in double precision with edge replication.
ImageTensor blur_oracle(const ImageTensor& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += w[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& x : w) x /= total;
  ImageTensor out(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) s += w[dy + radius] * w[dx + radius] * img.clamped(r + dy, c + dx, ch);
        }
        out.at(r, c, ch) = static_cast<float>(s);
      }
    }
  }
  return out;
}

TEST(Spec, RangeChecks) {
  const auto sched = SeveritySchedule::defaults();
  const ImageTensor img = synthesize_scene(8, 8, 1);
  EXPECT_THROW(apply_distortion(img, {26, 1, 0}, sched), ConfigError);
  EXPECT_THROW(apply_distortion(img, {0, 1, 0}, sched), ConfigError);
  EXPECT_THROW(apply_distortion(img, {3, 6, 0}, sched), ConfigError);
  SeveritySchedule partial = SeveritySchedule::from_json(R"({"9": [1, 2, 3, 4, 5]})");
  EXPECT_NO_THROW(apply_distortion(img, {9, 2, 0}, partial));
  EXPECT_THROW(apply_distortion(img, {16, 2, 0}, partial), ConfigError);
}

TEST(PseudoLabel, KnownLabels) {
  EXPECT_EQ(pseudo_label({25, 5, 0}), (PseudoLabel{"25-5", 124}));
  EXPECT_EQ(pseudo_label({1, 1, 0}), (PseudoLabel{"1-1", 0}));
}

TEST(PseudoLabel, BijectionOverAllClasses) {
  std::set<std::string> texts;
  for (int k = 0; k < kDistortionClasses; ++k) {
    const DistortionSpec s = spec_from_class(k);
    const PseudoLabel l = pseudo_label(s);
    EXPECT_EQ(l.class_index, k);
    EXPECT_EQ(l.text, std::to_string(s.model) + "-" + std::to_string(s.level));
    texts.insert(l.text);
  }
  EXPECT_EQ(texts.size(), 125u);
  EXPECT_THROW(spec_from_class(125), ConfigError);
}

TEST(Schedule, ShippedConfigEqualsDefaults) {
  const auto shipped = SeveritySchedule::load(fs::path(IQA_SOURCE_DIR) / "config" / "severity_schedule.json");
  EXPECT_EQ(shipped.to_json(), SeveritySchedule::defaults().to_json());
}

TEST(Schedule, DefaultsStrictlyMonotone) {
  const auto s = SeveritySchedule::defaults();
  EXPECT_NO_THROW(s.validate());
  for (int m = 1; m <= kDistortionModels; ++m) {
    ASSERT_TRUE(s.has(m));
    const double d = s.params(m, 2)[0] - s.params(m, 1)[0];
    for (int l = 1; l < kSeverityLevels; ++l) {
      const double step = s.params(m, l + 1)[0] - s.params(m, l)[0];
      EXPECT_GT(step * d, 0.0) << "model " << m << " level " << l;
    }
  }
}

TEST(Schedule, RejectsNonMonotoneAndRoundTrips) {
  EXPECT_THROW(SeveritySchedule::from_json(R"({"9": [1, 2, 2, 4, 5]})").validate(), ConfigError);
  EXPECT_THROW(SeveritySchedule::from_json(R"({"9": [1, 2, 3]})"), ConfigError);
  const auto s = SeveritySchedule::defaults();
  EXPECT_EQ(SeveritySchedule::from_json(s.to_json()).to_json(), s.to_json());
}

TEST(Apply, AllPairsValidDeterministicAndThreadInvariant) {
  const auto sched = SeveritySchedule::defaults();
  const ImageTensor img = synthesize_scene(40, 36, 21);
  for (int k = 0; k < kDistortionClasses; ++k) {
    DistortionSpec s = spec_from_class(k);
    s.seed = 1000 + k;
    ImageTensor one;
    {
      ScopedThreads t(1);
      one = apply_distortion(img, s, sched);
    }
    ImageTensor four;
    {
      ScopedThreads t(4);
      four = apply_distortion(img, s, sched);
    }
    EXPECT_EQ(one.height(), img.height());
    EXPECT_EQ(one.width(), img.width());
    EXPECT_TRUE(one.in_unit_range()) << pseudo_label(s).text;
    EXPECT_EQ(one, four) << pseudo_label(s).text;
    EXPECT_EQ(one, apply_distortion(img, s, sched)) << pseudo_label(s).text;
  }
}

TEST(Apply, GaussianBlurMatchesOracleAndIsMonotone) {
  const auto sched = SeveritySchedule::defaults();
  const ImageTensor img = synthesize_scene(48, 48, 5);
  double previous = 0.0;
  for (int l = 1; l <= kSeverityLevels; ++l) {
    const ImageTensor got = apply_distortion(img, {9, l, 0}, sched);
    const ImageTensor want = blur_oracle(img, sched.params(9, l)[0]);
    for (std::size_t i = 0; i < got.data().size(); ++i) ASSERT_NEAR(got.data()[i], want.data()[i], 1e-5);
    const double e = mse(want, img);
    EXPECT_GE(e, previous) << "level " << l;
    previous = e;
  }
}

TEST(Apply, DeterministicModelsDegradeMonotonically) {
  const auto sched = SeveritySchedule::defaults();
  for (int scene = 0; scene < 4; ++scene) {
    const ImageTensor img = synthesize_scene(64, 64, 300 + scene);
    for (int m : {2, 9, 15, 16, 21, 23}) {
      double previous = 0.0;
      for (int l = 1; l <= kSeverityLevels; ++l) {
        const double e = mse(apply_distortion(img, {m, l, 7}, sched), img);
        EXPECT_GE(e, previous) << "model " << m << " level " << l << " scene " << scene;
        previous = e;
      }
    }
  }
}

TEST(Apply, NoiseVarianceGrowsWithLevel) {
  const auto sched = SeveritySchedule::defaults();
  ImageTensor gray(64, 64);
  std::fill(gray.data().begin(), gray.data().end(), 0.5f);
  for (int m : {3, 7, 24, 25}) {
    std::vector<double> var;
    for (int l = 1; l <= kSeverityLevels; ++l) {
      EXPECT_GT(sched.params(m, l)[0], l > 1 ? sched.params(m, l - 1)[0] : 0.0);
      const ImageTensor out = apply_distortion(gray, {m, l, 99}, sched);
      double s = 0.0;
      double s2 = 0.0;
      for (std::size_t i = 0; i < out.data().size(); ++i) {
        const double d = static_cast<double>(out.data()[i]) - gray.data()[i];
        s += d;
        s2 += d * d;
      }
      const double n = static_cast<double>(out.data().size());
      var.push_back(s2 / n - (s / n) * (s / n));
    }
    for (int l = 1; l < kSeverityLevels; ++l) {
      // Strict growth, with the next level allowed to fall 20% short of
      // its nominal ratio to absorb sampling noise.
      EXPECT_GT(var[l], var[l - 1]) << "model " << m;
      const double nominal = sched.params(m, l + 1)[0] / sched.params(m, l)[0];
      EXPECT_GT(var[l] / var[l - 1], 0.8 * std::min(nominal, 1.25)) << "model " << m;
    }
  }
}

TEST(Manifest, LineRoundTripAndValidation) {
  ManifestEntry e{"a/b.png", "b_m9_l5.png", 9, 5, "9-5", 44, 123456789012345ULL};
  EXPECT_EQ(parse_manifest_line(manifest_line(e)), e);
  std::string bad = manifest_line(e);
  bad.replace(bad.find("\"9-5\""), 5, "\"9-4\"");
  EXPECT_THROW(parse_manifest_line(bad), DataError);
  EXPECT_THROW(parse_manifest_line("{not json"), DataError);
}

TEST(Manifest, ItemSeedIgnoresOrder) {
  EXPECT_EQ(corpus_item_seed(5, "x.png", 3, 2), corpus_item_seed(5, "x.png", 3, 2));
  EXPECT_NE(corpus_item_seed(5, "x.png", 3, 2), corpus_item_seed(5, "x.png", 2, 3));
  EXPECT_NE(corpus_item_seed(5, "x.png", 3, 2), corpus_item_seed(6, "x.png", 3, 2));
}

class CorpusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    pristine_ = fresh_dir("pristine");
    for (int i = 0; i < 3; ++i) save_image(synthesize_scene(24, 24, 40 + i), pristine_ / ("img" + std::to_string(i) + ".png"));
  }
  fs::path pristine_;
};

TEST_F(CorpusTest, FullGridCardinality) {
  fs::remove(pristine_ / "img2.png");
  const CorpusRequest req{pristine_, fresh_dir("full"), {}, {}, 4, "ppm"};
  const auto entries = generate_corpus(req, SeveritySchedule::defaults());
  EXPECT_EQ(entries.size(), 250u);
  EXPECT_EQ(read_manifest(req.out_dir / "manifest.jsonl"), entries);
  for (const auto& e : entries) EXPECT_TRUE(fs::exists(req.out_dir / e.output)) << e.output;
}

TEST_F(CorpusTest, SubsetEnumeration) {
  const CorpusRequest req{pristine_, fresh_dir("subset"), {9}, {1, 5}, 4, "png"};
  const auto entries = generate_corpus(req, SeveritySchedule::defaults());
  ASSERT_EQ(entries.size(), 6u);
  std::multiset<std::string> labels;
  for (const auto& e : entries) labels.insert(e.label);
  EXPECT_EQ(labels, (std::multiset<std::string>{"9-1", "9-1", "9-1", "9-5", "9-5", "9-5"}));
}

TEST_F(CorpusTest, RerunIsByteIdentical) {
  const CorpusRequest a{pristine_, fresh_dir("run_a"), {3, 16, 25}, {}, 11, "png"};
  CorpusRequest b = a;
  b.out_dir = fresh_dir("run_b");
  const auto ea = generate_corpus(a, SeveritySchedule::defaults());
  const auto eb = generate_corpus(b, SeveritySchedule::defaults());
  ASSERT_EQ(ea, eb);
  EXPECT_EQ(slurp(a.out_dir / "manifest.jsonl"), slurp(b.out_dir / "manifest.jsonl"));
  for (const auto& e : ea) EXPECT_EQ(slurp(a.out_dir / e.output), slurp(b.out_dir / e.output)) << e.output;
}

TEST_F(CorpusTest, Errors) {
  EXPECT_THROW(generate_corpus({fresh_dir("empty"), fresh_dir("o1"), {}, {}, 0, "png"}, SeveritySchedule::defaults()),
               DataError);
  EXPECT_THROW(generate_corpus({pristine_, fresh_dir("o2"), {30}, {}, 0, "png"}, SeveritySchedule::defaults()),
               ConfigError);
  EXPECT_THROW(generate_corpus({pristine_, fresh_dir("o3"), {}, {}, 0, "gif"}, SeveritySchedule::defaults()),
               ConfigError);
}

}  // namespace
}  // namespace iqa
