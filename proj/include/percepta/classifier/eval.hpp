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

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percepta/core/error.hpp"
#include "percepta/core/hash.hpp"
#include "percepta/dataset/genre.hpp"

namespace percepta {

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

/// Rows are true classes, columns predicted classes, both in `class_order`.
inline ConfusionMatrix confusion_matrix(const std::vector<Label>& truth, const std::vector<Label>& predicted,
                                        const std::vector<Label>& class_order) {
  if (truth.size() != predicted.size()) throw InputError("confusion_matrix: label lists differ in length");
  std::map<Label, std::size_t> index;
  for (std::size_t i = 0; i < class_order.size(); ++i) index[class_order[i]] = i;
  auto at = [&](const Label& l) {
    const auto it = index.find(l);
    if (it == index.end()) throw InputError("confusion_matrix: unknown label '" + l + "'");
    return it->second;
  };
  ConfusionMatrix m(class_order.size(), std::vector<std::size_t>(class_order.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++m[at(truth[i])][at(predicted[i])];
  return m;
}

namespace detail {

struct ClassScores {
  std::map<Label, double> f1;
  std::map<Label, std::size_t> support;
};

inline ClassScores class_scores(const std::vector<Label>& truth, const std::vector<Label>& predicted) {
  std::map<Label, std::size_t> tp, pred_count;
  ClassScores s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++s.support[truth[i]];
    ++pred_count[predicted[i]];
    if (truth[i] == predicted[i]) ++tp[truth[i]];
  }
  for (const auto& [label, support] : s.support) {
    const double t = static_cast<double>(tp[label]);
    const double precision = pred_count[label] ? t / static_cast<double>(pred_count[label]) : 0.0;
    const double recall = t / static_cast<double>(support);
    s.f1[label] = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  }
  return s;
}

}  // namespace detail

/// Per-class F1 averaged with weights proportional to true-class support.
inline double weighted_f1(const std::vector<Label>& truth, const std::vector<Label>& predicted) {
  if (truth.size() != predicted.size()) throw InputError("weighted_f1: label lists differ in length");
  if (truth.empty()) throw InputError("weighted_f1: empty label list");
  const auto s = detail::class_scores(truth, predicted);
  double total = 0;
  for (const auto& [label, support] : s.support) total += static_cast<double>(support) * s.f1.at(label);
  return total / static_cast<double>(truth.size());
}

struct EvalReport {
  std::vector<Label> class_order;
  double weighted_f1 = 0.0;
  std::map<Label, double> per_class_f1;
  std::map<Label, std::size_t> support;
  ConfusionMatrix confusion;
};

inline EvalReport evaluate(const std::vector<Label>& truth, const std::vector<Label>& predicted,
                           const std::vector<Label>& class_order) {
  EvalReport r;
  r.class_order = class_order;
  r.confusion = confusion_matrix(truth, predicted, class_order);
  r.weighted_f1 = weighted_f1(truth, predicted);
  const auto s = detail::class_scores(truth, predicted);
  for (const auto& c : class_order) {
    r.support[c] = s.support.count(c) ? s.support.at(c) : 0;
    r.per_class_f1[c] = s.f1.count(c) ? s.f1.at(c) : 0.0;
  }
  return r;
}

/// Sorted union of the given label lists.
inline std::vector<Label> label_order(std::initializer_list<const std::vector<Label>*> lists) {
  std::set<Label> all;
  for (const auto* l : lists) all.insert(l->begin(), l->end());
  return {all.begin(), all.end()};
}

inline std::vector<Label> gtzan_class_order() { return {kGenres.begin(), kGenres.end()}; }

inline nlohmann::json to_json(const EvalReport& r) {
  return {{"class_order", r.class_order},
          {"weighted_f1", r.weighted_f1},
          {"per_class_f1", r.per_class_f1},
          {"support", r.support},
          {"confusion", r.confusion}};
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.class_order = j.at("class_order").get<std::vector<Label>>();
  r.weighted_f1 = j.at("weighted_f1").get<double>();
  r.per_class_f1 = j.at("per_class_f1").get<std::map<Label, double>>();
  r.support = j.at("support").get<std::map<Label, std::size_t>>();
  r.confusion = j.at("confusion").get<ConfusionMatrix>();
  return r;
}

/// CSV with a header row of predicted labels; first column is the true label.
inline void write_confusion_csv(const EvalReport& r, const std::string& path,
                             std::optional<std::uint32_t> config_hash = std::nullopt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_hash_line(out, config_hash);
  out << "true\\predicted";
  for (const auto& c : r.class_order) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < r.class_order.size(); ++i) {
    out << r.class_order[i];
    for (std::size_t v : r.confusion[i]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace percepta
