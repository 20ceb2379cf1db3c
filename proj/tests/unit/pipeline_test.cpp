// Copyright 2026 The Percepta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "percepta/pipeline/runs.hpp"
#include "synthetic_corpus.hpp"

namespace fs = std::filesystem;

namespace {

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    base_ = fs::temp_directory_path() / "percepta_pipeline_test";
    manifest_ = testing_support::prepared_corpus(base_);
  }
  static void TearDownTestSuite() { fs::remove_all(base_); }

  static percepta::RunOptions opts(const std::string& name, std::size_t threads = 1) {
    fs::remove_all(base_ / name);
    return {(base_ / name).string(), threads, {}};
  }

  static fs::path base_;
  static std::string manifest_;
};

fs::path Pipeline::base_;
std::string Pipeline::manifest_;

TEST_F(Pipeline, PrepareAssignsEverySong) {
  const auto m = percepta::load_manifest(manifest_);
  EXPECT_EQ(m.entries.size(), 32u);
  EXPECT_EQ(m.splits.size(), 32u);
  ASSERT_TRUE(m.value_range.has_value());
  EXPECT_LT(m.value_range->lo, m.value_range->hi);
  percepta::PrepareOptions o;
  o.root = (base_ / "corpus").string();
  o.split_mode = percepta::SplitMode::kCanonical;
  EXPECT_THROW(percepta::prepare_dataset(o), percepta::ConfigError);
  o.split_mode = percepta::SplitMode::kAuto;
  EXPECT_FALSE(percepta::prepare_dataset(o).warnings.empty());
}

TEST_F(Pipeline, Experiment1BundleContract) {
  const auto cfg = testing_support::ci_config(manifest_);
  const auto b = percepta::run_experiment_1(cfg, opts("e1"));
  ASSERT_EQ(b.rows.size(), 3u);
  EXPECT_EQ(b.rows[0].metric, "MSE");
  EXPECT_EQ(b.rows[1].metric, "1-MS-SSIM");
  EXPECT_EQ(b.rows[2].metric, "NLPD");
  for (const char* t : {"mse", "msssim", "nlpd"}) {
    for (const std::string suffix : {".dmat", "_violin.csv", "_kcurve.csv", "_report.json", "_confusion.csv"}) {
      EXPECT_TRUE(fs::exists(b.dir / (t + suffix))) << t << suffix;
    }
    EXPECT_EQ(percepta::load_matrix((b.dir / (std::string(t) + ".dmat")).string()).config_hash, b.config_hash);
  }
  EXPECT_FALSE(fs::exists(fs::path(b.dir).parent_path() / ".percepta.lock"));
  const auto echo = percepta::read_json_file((b.dir / "config_echo.json").string());
  const auto again = percepta::experiment_config_from_json(echo);
  EXPECT_EQ(percepta::to_json(again), percepta::to_json(cfg));
}

TEST_F(Pipeline, Experiment1IndependentOfThreadsAndRerun) {
  const auto cfg = testing_support::ci_config(manifest_);
  const auto a = percepta::run_experiment_1(cfg, opts("t1", 1));
  const auto b = percepta::run_experiment_1(cfg, opts("t3", 3));
  EXPECT_EQ(testing_support::read_tree(a.dir), testing_support::read_tree(b.dir));
  percepta::RunOptions same{(base_ / "t1").string(), 2, {}};
  percepta::run_experiment_1(cfg, same);  // reuses matrices, rewrites the rest
  EXPECT_EQ(testing_support::read_tree(a.dir), testing_support::read_tree(b.dir));
}

TEST_F(Pipeline, RefusesToMixConfigs) {
  auto cfg = testing_support::ci_config(manifest_);
  cfg.metrics = {percepta::MetricKind::kMse};
  const auto o = opts("mix");
  percepta::run_experiment_1(cfg, o);
  cfg.k_max = 5;
  EXPECT_THROW(percepta::run_experiment_1(cfg, o), percepta::ConfigError);

  // A report stamped by another config is caught by the report step.
  cfg.k_max = 10;
  const auto path = (fs::path(o.out_dir) / "exp1" / "mse_report.json").string();
  auto j = percepta::read_json_file(path);
  j["config_hash"] = "00000000";
  percepta::write_json_file(j, path);
  EXPECT_THROW(percepta::build_report(o.out_dir), percepta::ConfigError);
}

TEST_F(Pipeline, LockAndMissingInputs) {
  auto cfg = testing_support::ci_config(manifest_);
  const auto o = opts("locked");
  fs::create_directories(o.out_dir);
  std::ofstream(fs::path(o.out_dir) / ".percepta.lock") << "1\n";
  EXPECT_THROW(percepta::run_experiment_1(cfg, o), percepta::ConfigError);
  cfg.manifest = (base_ / "nope.json").string();
  EXPECT_THROW(percepta::run_experiment_1(cfg, opts("missing")), percepta::ConfigError);
  auto m = percepta::load_manifest(manifest_);
  m.value_range.reset();
  const auto bare = (base_ / "bare.json").string();
  percepta::write_json_file(percepta::to_json(m), bare);
  cfg.manifest = bare;
  try {
    percepta::run_experiment_1(cfg, opts("missing"));
    FAIL();
  } catch (const percepta::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("value_range"), std::string::npos);
  }
}

TEST_F(Pipeline, Experiment2BundleAndReport) {
  const auto cfg = testing_support::ci_config(manifest_);
  const auto o = opts("e2", 2);
  const auto b = percepta::run_experiment_2(cfg, o);
  ASSERT_EQ(b.rows.size(), 3u);
  for (const char* t : {"mse", "msssim", "nlpd"}) {
    for (const std::string suffix : {".aep", "_curve.csv", "_features.csv", "_l2curve.csv", "_report.json",
                                     "_confusion.csv"}) {
      EXPECT_TRUE(fs::exists(b.dir / (t + suffix))) << t << suffix;
    }
    const auto f = percepta::read_features_csv((b.dir / (std::string(t) + "_features.csv")).string());
    EXPECT_EQ(f.table.ids.size(), 32u);
    EXPECT_EQ(f.table.values.cols(), 64u);
    EXPECT_EQ(f.config_hash, b.config_hash);
  }
  const auto echo = percepta::read_json_file((b.dir / "config_echo.json").string());
  EXPECT_EQ(echo.at("derived").at("quant_levels"), 32);
  EXPECT_TRUE(echo.at("derived").contains("architecture"));

  const auto c = percepta::run_experiment_2(cfg, opts("e2b", 1));
  EXPECT_EQ(testing_support::read_tree(b.dir), testing_support::read_tree(c.dir));

  percepta::run_experiment_1(cfg, {o.out_dir, 1, {}});
  const auto md = percepta::build_report(o.out_dir);
  EXPECT_NE(md.find("KNN on pairwise distances"), std::string::npos);
  EXPECT_NE(md.find("LR on latent features"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / "summary_table.csv"));
}

}  // namespace
