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

#include "percepta/pairwise/distance_matrix.hpp"
#include "percepta/pairwise/summary.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using percepta::Matrix;
using percepta::Spectrogram;

namespace {

std::vector<Spectrogram> random_songs(std::size_t n, std::size_t bands, std::size_t frames, std::uint64_t seed,
                                      bool vary_length = false) {
  std::vector<Spectrogram> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = vary_length ? frames + (i * 7) % 13 : frames;
    out.push_back({"song" + std::to_string(i), i % 2 ? "jazz" : "rock",
                   testing_support::random_matrix(bands, f, seed + i)});
  }
  return out;
}

std::string temp_path(const std::string& name) { return (fs::temp_directory_path() / ("percepta_pw_" + name)).string(); }

TEST(Pairwise, IdenticalSongsGiveZeroMatrix) {
  const Matrix x = testing_support::random_matrix(32, 40, 1);
  const std::vector<Spectrogram> songs{{"a", "rock", x}, {"b", "rock", x}, {"c", "rock", x}};
  for (auto k : percepta::kAllMetrics) {
    const auto m = percepta::compute_pairwise(songs, k, percepta::AlignmentPolicy::kTruncateLeft);
    for (double v : m.values.values()) EXPECT_LE(v, 1e-9) << percepta::metric_label(k);
  }
}

TEST(Pairwise, TwoSongsMse) {
  const auto songs = random_songs(2, 16, 20, 3);
  const auto m = percepta::compute_pairwise(songs, percepta::MetricKind::kMse, percepta::AlignmentPolicy::kTruncateLeft);
  EXPECT_EQ(m(0, 1), percepta::mse(songs[0].data, songs[1].data));
  EXPECT_EQ(m(1, 0), m(0, 1));
  EXPECT_EQ(m(0, 0), 0.0);
}

TEST(Pairwise, MatchesSequentialOracleBitForBit) {
  const auto songs = random_songs(10, 24, 40, 10, true);
  const percepta::MetricConfig cfg;
  for (auto kind : percepta::kAllMetrics) {
    for (auto policy : {percepta::AlignmentPolicy::kTruncateLeft, percepta::AlignmentPolicy::kCenterCrop}) {
      const auto m = percepta::compute_pairwise(songs, kind, policy, cfg, 3);
      for (std::size_t i = 0; i < songs.size(); ++i) {
        for (std::size_t j = i + 1; j < songs.size(); ++j) {
          const std::size_t f = std::min(songs[i].frames(), songs[j].frames());
          const double expect = percepta::distance(kind, percepta::crop_frames(songs[i].data, f, policy),
                                                   percepta::crop_frames(songs[j].data, f, policy), cfg);
          ASSERT_EQ(m(i, j), expect) << percepta::metric_label(kind) << " " << i << "," << j;
        }
      }
      m.validate();
    }
  }
}

TEST(Pairwise, IndependentOfThreadCount) {
  const auto songs = random_songs(9, 16, 33, 20, true);
  const auto one = percepta::compute_pairwise(songs, percepta::MetricKind::kNlpd, percepta::AlignmentPolicy::kTruncateLeft, {}, 1);
  const auto four = percepta::compute_pairwise(songs, percepta::MetricKind::kNlpd, percepta::AlignmentPolicy::kTruncateLeft, {}, 4);
  EXPECT_EQ(one.values, four.values);
}

TEST(Pairwise, CenterCropKeepsMiddle) {
  const Matrix m{{0, 1, 2, 3, 4}};
  EXPECT_EQ(percepta::crop_frames(m, 3, percepta::AlignmentPolicy::kCenterCrop), (Matrix{{1, 2, 3}}));
  EXPECT_EQ(percepta::crop_frames(m, 3, percepta::AlignmentPolicy::kTruncateLeft), (Matrix{{0, 1, 2}}));
}

TEST(Pairwise, Errors) {
  auto songs = random_songs(3, 16, 20, 5);
  songs[2].data = testing_support::random_matrix(15, 20, 9);
  EXPECT_THROW(percepta::compute_pairwise(songs, percepta::MetricKind::kMse, percepta::AlignmentPolicy::kTruncateLeft),
               percepta::InputError);
  EXPECT_THROW(percepta::compute_pairwise({songs[0]}, percepta::MetricKind::kMse, percepta::AlignmentPolicy::kTruncateLeft),
               percepta::InputError);
  // 16x8 is too small for the SSIM window; the error names the pair.
  auto tiny = random_songs(2, 16, 8, 6);
  try {
    percepta::compute_pairwise(tiny, percepta::MetricKind::kOneMinusMsSsim, percepta::AlignmentPolicy::kTruncateLeft);
    FAIL();
  } catch (const percepta::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("'song0', 'song1'"), std::string::npos) << e.what();
  }
}

TEST(Dmat, RoundTripAndSize) {
  percepta::DistanceMatrix m;
  m.ids = {"a", "bb", "ccc", "d", "e"};
  m.values = Matrix(5, 5);
  percepta::Rng rng(3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) m.values(i, j) = m.values(j, i) = rng.uniform();
  m.metric = percepta::MetricKind::kNlpd;
  m.policy = percepta::AlignmentPolicy::kCenterCrop;
  m.config_hash = 0xdeadbeef;
  const auto path = temp_path("rt.dmat");
  percepta::save_matrix(m, path);
  const std::size_t id_table = (2 + 1) + (2 + 2) + (2 + 3) + (2 + 1) + (2 + 1);
  EXPECT_EQ(fs::file_size(path), 16 + id_table + 25 * 8);
  const auto back = percepta::load_matrix(path);
  EXPECT_EQ(back.ids, m.ids);
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.metric, m.metric);
  EXPECT_EQ(back.policy, m.policy);
  EXPECT_EQ(back.config_hash, m.config_hash);

  fs::resize_file(path, fs::file_size(path) - 5);
  EXPECT_THROW(percepta::load_matrix(path), percepta::FormatError);
  std::ofstream(path, std::ios::binary) << "DMT2xxxx";
  EXPECT_THROW(percepta::load_matrix(path), percepta::FormatError);
  fs::remove(path);
}

TEST(Dmat, SaveRejectsAsymmetric) {
  percepta::DistanceMatrix m;
  m.ids = {"a", "b"};
  m.values = Matrix{{0, 1}, {2, 0}};
  EXPECT_THROW(percepta::save_matrix(m, temp_path("bad.dmat")), percepta::DataError);
}

percepta::DistanceMatrix matrix_from(const std::vector<std::string>& ids, const Matrix& v) {
  percepta::DistanceMatrix m;
  m.ids = ids;
  m.values = v;
  return m;
}

TEST(Summary, TwoSongsSameGenre) {
  const auto m = matrix_from({"a", "b"}, Matrix{{0, 0.7}, {0.7, 0}});
  const auto s = percepta::distribution_summary(m, {{"a", "blues"}, {"b", "blues"}});
  EXPECT_EQ(s.at("blues").count, 1u);
  for (double q : s.at("blues").quantiles) EXPECT_EQ(q, 0.7);
  EXPECT_EQ(s.at("blues").quantiles.size(), 128u);
}

TEST(Summary, PairCounting) {
  Matrix v(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) v(i, j) = i == j ? 0 : 1.0 + i + j;
  const auto s = percepta::distribution_summary(matrix_from({"a", "b", "c", "d"}, v),
                                                {{"a", "rock"}, {"b", "rock"}, {"c", "pop"}, {"d", "pop"}});
  EXPECT_EQ(s.at("all").count, 6u);
  EXPECT_EQ(s.at("rock").count, 1u);
  EXPECT_EQ(s.at("pop").count, 1u);
  EXPECT_THROW(percepta::distribution_summary(matrix_from({"a", "b", "c", "d"}, v), {{"a", "rock"}}),
               percepta::InputError);
}

TEST(Summary, QuantilesMonotoneAndCountsBounded) {
  const auto songs = random_songs(12, 16, 16, 40);
  const auto m = percepta::compute_pairwise(songs, percepta::MetricKind::kMse, percepta::AlignmentPolicy::kTruncateLeft);
  std::map<std::string, percepta::Label> g;
  for (const auto& s : songs) g[s.id] = s.genre;
  const auto s = percepta::distribution_summary(m, g);
  std::size_t within = 0;
  for (const auto& [name, stats] : s) {
    EXPECT_TRUE(std::is_sorted(stats.quantiles.begin(), stats.quantiles.end()));
    EXPECT_EQ(stats.quantiles.front(), stats.min);
    EXPECT_EQ(stats.quantiles.back(), stats.max);
    if (name != "all") within += stats.count;
  }
  EXPECT_LT(within, s.at("all").count);
  EXPECT_EQ(s.at("all").count, 66u);
  EXPECT_EQ(s.at("rock").count, 15u);
}

TEST(SpreadRatio, Cases) {
  percepta::DistributionSummary s;
  s["all"] = percepta::describe({1, 2, 3, 4, 5});
  s["same"] = percepta::describe({1, 2, 3, 4, 5});
  s["point"] = percepta::describe({2, 2, 2});
  EXPECT_DOUBLE_EQ(percepta::spread_ratio(s, "same"), 1.0);
  EXPECT_DOUBLE_EQ(percepta::spread_ratio(s, "point"), 0.0);
  s["all"] = percepta::describe({3, 3});
  EXPECT_THROW(percepta::spread_ratio(s, "same"), percepta::DegenerateInputError);
}

TEST(Violin, CsvLayout) {
  const auto m = matrix_from({"a", "b", "c"}, Matrix{{0, 1, 2}, {1, 0, 3}, {2, 3, 0}});
  const auto s = percepta::distribution_summary(m, {{"a", "rock"}, {"b", "rock"}, {"c", "pop"}});
  const auto path = temp_path("violin.csv");
  percepta::write_violin_csv(s, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "group,stat_name,value");
  std::getline(in, line);
  EXPECT_EQ(line, "all,count,3");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 * (8 + 128));  // "all" and "rock"; "pop" has no pairs
  fs::remove(path);
}

}  // namespace
