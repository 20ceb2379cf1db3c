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
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "percepta/core/error.hpp"
#include "percepta/core/hash.hpp"
#include "percepta/pairwise/distance_matrix.hpp"

namespace percepta {

inline constexpr std::size_t kViolinQuantiles = 128;
inline constexpr const char* kAllGroup = "all";

struct GroupStats {
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0, stddev = 0;
  std::vector<double> quantiles;  // kViolinQuantiles evenly spaced levels, 0 to 1

  double iqr() const { return q3 - q1; }
};

/// Group name -> statistics. "all" holds every pair; each genre holds its
/// within-genre pairs. Groups with no pairs are omitted.
using DistributionSummary = std::map<std::string, GroupStats>;

/// Linear interpolation between order statistics at position (n-1)*q.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline GroupStats describe(std::vector<double> v) {
  GroupStats s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(v.size()));
  s.quantiles.resize(kViolinQuantiles);
  for (std::size_t i = 0; i < kViolinQuantiles; ++i) {
    s.quantiles[i] = quantile_sorted(v, static_cast<double>(i) / static_cast<double>(kViolinQuantiles - 1));
  }
  return s;
}

inline DistributionSummary distribution_summary(const DistanceMatrix& m, const std::map<std::string, Label>& genre_of) {
  std::vector<Label> genres(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto it = genre_of.find(m.ids[i]);
    if (it == genre_of.end()) throw InputError("id '" + m.ids[i] + "' has no genre");
    genres[i] = it->second;
  }
  std::vector<double> all;
  std::map<Label, std::vector<double>> within;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      all.push_back(m(i, j));
      if (genres[i] == genres[j]) within[genres[i]].push_back(m(i, j));
    }
  }
  DistributionSummary out;
  out[kAllGroup] = describe(std::move(all));
  for (auto& [g, v] : within) out[g] = describe(std::move(v));
  return out;
}

/// Within-genre IQR relative to the IQR over all pairs.
inline double spread_ratio(const DistributionSummary& s, const std::string& genre) {
  const auto all = s.find(kAllGroup);
  const auto g = s.find(genre);
  if (all == s.end() || g == s.end()) throw InputError("summary lacks group '" + genre + "' or 'all'");
  if (all->second.iqr() == 0.0) throw DegenerateInputError("'all' distribution has zero interquartile range");
  return g->second.iqr() / all->second.iqr();
}

/// Mean spread_ratio over every genre group present.
inline double mean_spread_ratio(const DistributionSummary& s) {
  double total = 0;
  std::size_t n = 0;
  for (const auto& [name, stats] : s) {
    if (name == kAllGroup) continue;
    total += spread_ratio(s, name);
    ++n;
  }
  if (n == 0) throw DegenerateInputError("summary has no genre groups");
  return total / static_cast<double>(n);
}

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Long-form CSV (group, stat_name, value) for violin plots. "all" first.
inline void write_violin_csv(const DistributionSummary& s, const std::string& path,
                             std::optional<std::uint32_t> config_hash = std::nullopt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_hash_line(out, config_hash);
  out << "group,stat_name,value\n";
  auto emit = [&](const std::string& group, const GroupStats& g) {
    out << group << ",count," << g.count << '\n';
    out << group << ",min," << format_double(g.min) << '\n';
    out << group << ",q1," << format_double(g.q1) << '\n';
    out << group << ",median," << format_double(g.median) << '\n';
    out << group << ",q3," << format_double(g.q3) << '\n';
    out << group << ",max," << format_double(g.max) << '\n';
    out << group << ",mean," << format_double(g.mean) << '\n';
    out << group << ",stddev," << format_double(g.stddev) << '\n';
    char name[16];
    for (std::size_t i = 0; i < g.quantiles.size(); ++i) {
      std::snprintf(name, sizeof name, "q%03zu", i);
      out << group << ',' << name << ',' << format_double(g.quantiles[i]) << '\n';
    }
  };
  emit(kAllGroup, s.at(kAllGroup));
  for (const auto& [name, g] : s) {
    if (name != kAllGroup) emit(name, g);
  }
}

}  // namespace percepta
