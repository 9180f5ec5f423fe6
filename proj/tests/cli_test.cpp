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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iqa/harness.hpp"

namespace iqa {
namespace fs = std::filesystem;
namespace {

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::temp_directory_path() / "iqa_cli_test");
    fs::remove_all(*dir_);
    fs::create_directories(*dir_);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }

  static int run(const std::string& args) {
    const std::string cmd = std::string(IQA_CLI) + " --out " + dir_->string() + " " + args + " > " +
                            (*dir_ / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, GridSearchOverPublishedValues) {
  ASSERT_EQ(run("grid-search --values " IQA_SOURCE_DIR "/config/reference_loss_grid.csv"), 0) << read(*dir_ / "stdout.txt");
  const std::string csv = read(*dir_ / "grid_search.csv");
  EXPECT_EQ(csv.rfind("lambda1,lambda2,loss\n", 0), 0u);
  EXPECT_NE(csv.find("0.5,0.5,0.032\n"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("distort --input /nonexistent.png --output x.png --model 9 --level 1"), 3);
  EXPECT_EQ(run("corpus --scenes 1 --models 26"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  std::ofstream(*dir_ / "bad.json") << "{\"bogus_key\": 1}";
  EXPECT_EQ(run("--config " + (*dir_ / "bad.json").string() + " corpus --scenes 1 --models 9"), 2);
}

TEST_F(CliTest, CorpusThenHoldout) {
  ASSERT_EQ(run("--seed 5 corpus --scenes 8 --size 32 --models 24,25"), 0) << read(*dir_ / "stdout.txt");
  const fs::path manifest = *dir_ / "manifest.jsonl";
  ASSERT_TRUE(fs::exists(manifest));
  PipelineConfig cfg;
  cfg.pretrain = false;
  cfg.finetune_train.max_epochs = 5;
  std::ofstream(*dir_ / "pipeline_small.json") << cfg.to_json();
  ASSERT_EQ(run("--seed 5 --config " + (*dir_ / "pipeline_small.json").string() + " eval --holdout --dataset " +
                manifest.string()),
            0)
      << read(*dir_ / "stdout.txt");
  const std::string report = read(*dir_ / "report.csv");
  EXPECT_EQ(report.rfind("dataset,plcc,srocc,rmse,fingerprint\n", 0), 0u);
  const std::string residuals = read(*dir_ / "report_residuals.csv");
  EXPECT_EQ(std::count(residuals.begin(), residuals.end(), '\n'), 1 + 16);  // 20% of 80 rows
  EXPECT_TRUE(fs::exists(*dir_ / "report_scatter.dat"));
}

}  // namespace
}  // namespace iqa
