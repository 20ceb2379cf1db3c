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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "percepta/classifier/eval.hpp"
#include "percepta/classifier/features_io.hpp"
#include "percepta/classifier/logreg.hpp"
#include "percepta/dataset/manifest.hpp"

namespace percepta {

inline const std::vector<double>& default_l2_grid() {
  static const std::vector<double> grid{1e-4, 1e-3, 1e-2};
  return grid;
}

struct LogRegResult {
  double l2 = 0.0;
  std::vector<std::pair<double, double>> curve;  // (l2, validation weighted F1)
  Standardizer scaler;
  LogRegModel model;
  EvalReport report;
  std::vector<std::string> ids;
  std::vector<Label> predicted;
};

namespace detail {

struct SplitRows {
  Matrix values;
  std::vector<std::string> ids;
  std::vector<Label> labels;
};

inline SplitRows split_rows(const FeatureTable& t, const SplitAssignment& splits, Split which) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < t.ids.size(); ++r) {
    const auto it = splits.find(t.ids[r]);
    if (it == splits.end()) throw ConfigError("id '" + t.ids[r] + "' has no split assignment");
    if (it->second == which) rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError(std::string(split_name(which)) + " split is empty");
  SplitRows out{Matrix(rows.size(), t.values.cols()), {}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(t.values.row(rows[i]).begin(), t.values.row(rows[i]).end(), out.values.row(i).begin());
    out.ids.push_back(t.ids[rows[i]]);
    out.labels.push_back(t.genres[rows[i]]);
  }
  return out;
}

}  // namespace detail

/// Standardizes with train statistics, picks l2 by validation weighted F1
/// (ties go to the earlier grid entry), then evaluates the train-fitted
/// model on the test split.
inline LogRegResult run_logreg(const FeatureTable& t, const SplitAssignment& splits,
                               const std::vector<double>& l2_grid = default_l2_grid(), LogRegConfig cfg = {},
                               std::vector<Label> class_order = {}) {
  if (l2_grid.empty()) throw ConfigError("l2 grid is empty");
  const auto train = detail::split_rows(t, splits, Split::kTrain);
  const auto valid = detail::split_rows(t, splits, Split::kValid);
  const auto test = detail::split_rows(t, splits, Split::kTest);
  LogRegResult r;
  r.scaler = Standardizer::fit(train.values);
  const Matrix xtr = r.scaler.transform(train.values);
  const Matrix xva = r.scaler.transform(valid.values);
  double best = -1.0;
  for (double l2 : l2_grid) {
    cfg.l2 = l2;
    auto model = logreg_train(xtr, train.labels, cfg);
    const double f1 = weighted_f1(valid.labels, logreg_predict(model, xva));
    r.curve.emplace_back(l2, f1);
    if (f1 > best) {
      best = f1;
      r.l2 = l2;
      r.model = std::move(model);
    }
  }
  r.ids = test.ids;
  r.predicted = logreg_predict(r.model, r.scaler.transform(test.values));
  if (class_order.empty()) class_order = label_order({&train.labels, &test.labels, &r.predicted});
  r.report = evaluate(test.labels, r.predicted, class_order);
  return r;
}

}  // namespace percepta
