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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "percepta/classifier/eval.hpp"
#include "percepta/core/error.hpp"
#include "percepta/dataset/manifest.hpp"
#include "percepta/pairwise/distance_matrix.hpp"

namespace percepta {

struct KnnModel {
  std::size_t k = 1;
  std::vector<std::string> train_ids;
  std::map<std::string, Label> labels;
  MetricKind metric = MetricKind::kMse;
};

/// Train indices ordered by distance; equal distances keep train order.
inline std::vector<std::size_t> neighbour_order(std::span<const double> distances) {
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  return order;
}

/// Midrank of order[n] among all train distances: equal distances share
/// the average of their positions.
inline double midrank(std::span<const std::size_t> order, std::size_t n, std::span<const double> distances) {
  const double d = distances[order[n]];
  std::size_t lo = n, hi = n + 1;
  while (lo > 0 && distances[order[lo - 1]] == d) --lo;
  while (hi < order.size() && distances[order[hi]] == d) ++hi;
  return 0.5 * static_cast<double>(lo + hi - 1);
}

/// Majority vote over the first k entries of `order`. Vote ties go to the
/// smallest mean rank of the tied genres' neighbours, then to the
/// lexicographically first label. Ranks rather than raw distances keep the
/// vote invariant under increasing transforms of the distances.
inline Label vote(std::span<const std::size_t> order, std::size_t k, std::span<const double> distances,
                  const std::vector<Label>& train_labels) {
  struct Tally {
    std::size_t votes = 0;
    double rank_sum = 0.0;
  };
  std::map<Label, Tally> tally;
  for (std::size_t n = 0; n < k; ++n) {
    auto& t = tally[train_labels[order[n]]];
    ++t.votes;
    t.rank_sum += midrank(order, n, distances);
  }
  const Label* best = nullptr;
  const Tally* best_t = nullptr;
  for (const auto& [label, t] : tally) {  // map iteration is lexicographic
    // Equal vote counts make comparing rank sums the same as comparing means.
    if (!best || t.votes > best_t->votes || (t.votes == best_t->votes && t.rank_sum < best_t->rank_sum)) {
      best = &label;
      best_t = &t;
    }
  }
  return *best;
}

inline Label knn_predict(const KnnModel& model, std::span<const double> distances_to_train) {
  if (model.k == 0 || model.k > model.train_ids.size()) {
    throw ConfigError("k = " + std::to_string(model.k) + " outside [1, " + std::to_string(model.train_ids.size()) + "]");
  }
  if (distances_to_train.size() != model.train_ids.size()) {
    throw InputError("distance vector has " + std::to_string(distances_to_train.size()) + " entries, model has " +
                     std::to_string(model.train_ids.size()) + " training songs");
  }
  std::vector<Label> train_labels;
  train_labels.reserve(model.train_ids.size());
  for (const auto& id : model.train_ids) {
    const auto it = model.labels.find(id);
    if (it == model.labels.end()) throw InputError("training id '" + id + "' has no label");
    train_labels.push_back(it->second);
  }
  for (double d : distances_to_train) {
    if (!std::isfinite(d) || d < 0) throw InputError("distances must be finite and non-negative");
  }
  const auto order = neighbour_order(distances_to_train);
  return vote(order, model.k, distances_to_train, train_labels);
}

namespace detail {

/// Matrix rows for one split plus the train rows, in matrix order.
struct KnnSetup {
  std::vector<std::size_t> train;
  std::vector<std::size_t> queries;
  std::vector<Label> train_labels;
  std::vector<Label> query_labels;
};

inline KnnSetup knn_setup(const DistanceMatrix& m, const SplitAssignment& splits,
                          const std::map<std::string, Label>& genre_of, Split query_split) {
  KnnSetup s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto sp = splits.find(m.ids[i]);
    if (sp == splits.end()) throw ConfigError("id '" + m.ids[i] + "' has no split assignment");
    const auto g = genre_of.find(m.ids[i]);
    if (g == genre_of.end()) throw ConfigError("id '" + m.ids[i] + "' has no genre");
    if (sp->second == Split::kTrain) {
      s.train.push_back(i);
      s.train_labels.push_back(g->second);
    } else if (sp->second == query_split) {
      s.queries.push_back(i);
      s.query_labels.push_back(g->second);
    }
  }
  if (s.train.empty()) throw ConfigError("training split is empty");
  if (s.queries.empty()) {
    throw ConfigError(std::string(split_name(query_split)) + " split is empty");
  }
  return s;
}

inline std::vector<double> distances_to(const DistanceMatrix& m, std::size_t query,
                                        const std::vector<std::size_t>& train) {
  std::vector<double> d(train.size());
  for (std::size_t t = 0; t < train.size(); ++t) d[t] = m(query, train[t]);
  return d;
}

}  // namespace detail

struct KSelection {
  std::size_t k = 0;
  double best_f1 = 0.0;
  std::vector<std::pair<std::size_t, double>> curve;  // (k, validation weighted F1)
};

/// Validation weighted F1 for every k in [k_min, k_max]; ties go to the smaller k.
inline KSelection select_k(const DistanceMatrix& m, const SplitAssignment& splits,
                           const std::map<std::string, Label>& genre_of, std::size_t k_min, std::size_t k_max) {
  if (k_min == 0 || k_min > k_max) throw ConfigError("empty or invalid k range");
  const auto s = detail::knn_setup(m, splits, genre_of, Split::kValid);
  if (k_max > s.train.size()) {
    throw ConfigError("k up to " + std::to_string(k_max) + " exceeds training size " + std::to_string(s.train.size()));
  }
  const std::size_t nk = k_max - k_min + 1;
  std::vector<std::vector<Label>> predictions(nk, std::vector<Label>(s.queries.size()));
  for (std::size_t q = 0; q < s.queries.size(); ++q) {
    const auto d = detail::distances_to(m, s.queries[q], s.train);
    const auto order = neighbour_order(d);
    for (std::size_t k = k_min; k <= k_max; ++k) predictions[k - k_min][q] = vote(order, k, d, s.train_labels);
  }
  KSelection out;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const double f1 = weighted_f1(s.query_labels, predictions[k - k_min]);
    out.curve.emplace_back(k, f1);
    if (out.k == 0 || f1 > out.best_f1) {
      out.k = k;
      out.best_f1 = f1;
    }
  }
  return out;
}

struct KnnResult {
  EvalReport report;
  std::vector<std::string> ids;
  std::vector<Label> predicted;
};

/// Classifies every test song against training songs only.
inline KnnResult knn_evaluate(const DistanceMatrix& m, const SplitAssignment& splits,
                              const std::map<std::string, Label>& genre_of, std::size_t k,
                              std::vector<Label> class_order = {}) {
  const auto s = detail::knn_setup(m, splits, genre_of, Split::kTest);
  if (k == 0 || k > s.train.size()) {
    throw ConfigError("k = " + std::to_string(k) + " outside [1, " + std::to_string(s.train.size()) + "]");
  }
  KnnResult r;
  for (std::size_t q = 0; q < s.queries.size(); ++q) {
    const auto d = detail::distances_to(m, s.queries[q], s.train);
    r.ids.push_back(m.ids[s.queries[q]]);
    r.predicted.push_back(vote(neighbour_order(d), k, d, s.train_labels));
  }
  if (class_order.empty()) class_order = label_order({&s.train_labels, &s.query_labels, &r.predicted});
  r.report = evaluate(s.query_labels, r.predicted, class_order);
  return r;
}

}  // namespace percepta
