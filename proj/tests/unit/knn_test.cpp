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

#include <algorithm>

#include "percepta/knn/knn.hpp"

#include "knn_oracle.hpp"
#include "test_support.hpp"

using percepta::Label;
using percepta::Matrix;

namespace {

percepta::KnnModel model(std::size_t k, const std::vector<Label>& labels) {
  percepta::KnnModel m;
  m.k = k;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.train_ids.push_back("t" + std::to_string(i));
    m.labels[m.train_ids.back()] = labels[i];
  }
  return m;
}

TEST(KnnPredict, HandCases) {
  EXPECT_EQ(percepta::knn_predict(model(1, {"jazz", "blues", "rock"}), std::vector<double>{0.4, 0.0, 0.2}), "blues");
  EXPECT_EQ(percepta::knn_predict(model(3, {"jazz", "jazz", "rock", "pop"}), std::vector<double>{0.1, 0.2, 0.15, 0.9}),
            "jazz");
  // Vote tie with equal distances: lexicographic order decides.
  EXPECT_EQ(percepta::knn_predict(model(2, {"rock", "jazz", "pop"}), std::vector<double>{0.1, 0.1, 0.5}), "jazz");
  // Vote tie broken by the nearer neighbour.
  EXPECT_EQ(percepta::knn_predict(model(2, {"jazz", "rock", "pop"}), std::vector<double>{0.2, 0.1, 0.5}), "rock");
  // Mean rank decides, not mean distance: jazz ranks {0, 4}, rock {1, 2}.
  EXPECT_EQ(percepta::knn_predict(model(5, {"jazz", "rock", "rock", "pop", "jazz", "pop"}),
                                  std::vector<double>{0.1, 0.2, 0.3, 0.31, 0.35, 0.9}),
            "rock");
}

TEST(KnnPredict, Errors) {
  EXPECT_THROW(percepta::knn_predict(model(4, {"a", "b", "c"}), std::vector<double>{1, 2, 3}), percepta::ConfigError);
  EXPECT_THROW(percepta::knn_predict(model(1, {"a", "b", "c"}), std::vector<double>{1, 2}), percepta::InputError);
}

// Exhaustive neighbour search: repeatedly take the smallest remaining
// distance (lowest index on ties), then count votes directly.
TEST(KnnPredict, MatchesBruteForceAndRankInvariance) {
  percepta::Rng rng(2024);
  const std::vector<Label> genres{"blues", "jazz", "rock", "pop"};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 15;
    std::vector<Label> labels(n);
    std::vector<std::array<double, 3>> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = genres[rng.below(genres.size())];
      for (double& c : pts[i]) c = rng.uniform();
    }
    std::array<double, 3> q{rng.uniform(), rng.uniform(), rng.uniform()};
    std::vector<double> d(n), d2(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += (pts[i][c] - q[c]) * (pts[i][c] - q[c]);
      d[i] = std::sqrt(s);
      d2[i] = d[i] * d[i];
    }
    for (std::size_t k = 1; k <= 7; ++k) {
      const auto m = model(k, labels);
      const Label got = percepta::knn_predict(m, d);
      EXPECT_EQ(got, oracle::knn_brute_force(d, labels, k));
      EXPECT_EQ(percepta::knn_predict(m, d2), got);
    }
  }
}

TEST(KnnPredict, PermutationInvariantWithDistinctDistances) {
  percepta::Rng rng(5);
  std::vector<Label> labels{"a", "b", "c", "a", "b", "c", "a", "b"};
  std::vector<double> d(labels.size());
  for (double& v : d) v = rng.uniform();
  const Label base = percepta::knn_predict(model(3, labels), d);
  for (int p = 0; p < 10; ++p) {
    std::vector<std::size_t> perm(labels.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<Label> l2;
    std::vector<double> d2;
    for (auto i : perm) l2.push_back(labels[i]), d2.push_back(d[i]);
    EXPECT_EQ(percepta::knn_predict(model(3, l2), d2), base);
  }
}

// Two clusters on a line: songs 0..9 near 0 ("blues"), 10..19 near 100 ("rock").
struct ClusterData {
  percepta::DistanceMatrix m;
  percepta::SplitAssignment splits;
  std::map<std::string, Label> genre;
};

ClusterData clusters() {
  ClusterData c;
  std::vector<double> pos;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "s" + std::to_string(100 + i);
    c.m.ids.push_back(id);
    pos.push_back(i < 10 ? i * 0.1 : 100 + i * 0.1);
    c.genre[id] = i < 10 ? "blues" : "rock";
    const int r = i % 10;
    c.splits[id] = r < 6 ? percepta::Split::kTrain : r < 8 ? percepta::Split::kValid : percepta::Split::kTest;
  }
  c.m.values = Matrix(20, 20);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) c.m.values(i, j) = std::abs(pos[i] - pos[j]);
  return c;
}

TEST(SelectK, SeparatedClustersPickSmallestK) {
  const auto c = clusters();
  const auto sel = percepta::select_k(c.m, c.splits, c.genre, 1, 5);
  EXPECT_EQ(sel.k, 1u);
  ASSERT_EQ(sel.curve.size(), 5u);
  for (const auto& [k, f1] : sel.curve) EXPECT_EQ(f1, 1.0) << k;
  double best = 0;
  for (const auto& pt : sel.curve) best = std::max(best, pt.second);
  EXPECT_EQ(sel.best_f1, best);
  EXPECT_EQ(percepta::select_k(c.m, c.splits, c.genre, 5, 5).k, 5u);
}

TEST(SelectK, Errors) {
  auto c = clusters();
  EXPECT_THROW(percepta::select_k(c.m, c.splits, c.genre, 1, 13), percepta::ConfigError);
  for (auto& [id, s] : c.splits)
    if (s == percepta::Split::kValid) s = percepta::Split::kTrain;
  EXPECT_THROW(percepta::select_k(c.m, c.splits, c.genre, 1, 3), percepta::ConfigError);
}

TEST(KnnEvaluate, DuplicatedTestSongsScorePerfectly) {
  percepta::DistanceMatrix m;
  m.ids = {"a", "b", "c", "a2", "b2", "c2"};
  m.values = Matrix(6, 6, 1.0);
  for (int i = 0; i < 6; ++i) m.values(i, i) = 0;
  for (int i = 0; i < 3; ++i) m.values(i, i + 3) = m.values(i + 3, i) = 0.0;
  std::map<std::string, Label> g{{"a", "x"}, {"a2", "x"}, {"b", "y"}, {"b2", "y"}, {"c", "z"}, {"c2", "z"}};
  percepta::SplitAssignment s;
  for (const auto& id : {"a", "b", "c"}) s[id] = percepta::Split::kTrain;
  for (const auto& id : {"a2", "b2", "c2"}) s[id] = percepta::Split::kTest;
  const auto r = percepta::knn_evaluate(m, s, g, 1);
  EXPECT_EQ(r.report.weighted_f1, 1.0);
  EXPECT_EQ(r.report.confusion, (percepta::ConfusionMatrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

TEST(KnnEvaluate, ValidationSongsAreNeverNeighbours) {
  auto c = clusters();
  // Make every test song's nearest song a validation song of the other genre.
  const std::size_t test_blues = 8, valid_rock = 16;
  c.m.values(test_blues, valid_rock) = c.m.values(valid_rock, test_blues) = 0.0;
  const auto r = percepta::knn_evaluate(c.m, c.splits, c.genre, 1);
  EXPECT_EQ(r.report.weighted_f1, 1.0);
}

}  // namespace
