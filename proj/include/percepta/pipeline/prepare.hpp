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

#include <cstdint>
#include <string>

#include "percepta/core/rng.hpp"
#include "percepta/dataset/manifest.hpp"

namespace percepta {

enum class SplitMode { kAuto, kCanonical, kProportional };

inline SplitMode parse_split_mode(const std::string& s) {
  if (s == "auto") return SplitMode::kAuto;
  if (s == "canonical") return SplitMode::kCanonical;
  if (s == "proportional") return SplitMode::kProportional;
  throw ConfigError("unknown split mode '" + s + "' (expected auto, canonical or proportional)");
}

struct PrepareOptions {
  std::string root;
  std::string exclusions;  // path to an exclusion list; empty for none
  SplitMode split_mode = SplitMode::kAuto;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Scans the corpus, applies exclusions, records the global value range and
/// assigns splits. Table split sizes are used when the genre totals match
/// them; `auto` otherwise falls back to proportional sizes with a warning.
inline DatasetManifest prepare_dataset(const PrepareOptions& o) {
  DatasetManifest m = o.exclusions.empty() ? build_manifest(o.root, std::set<std::string>{})
                                           : build_manifest(o.root, o.exclusions);
  if (m.entries.empty()) throw IngestionError("no spectrogram files found under '" + o.root + "'");
  m.value_range = compute_value_range(m, o.threads);
  const bool table = matches_canonical_totals(m);
  std::map<Label, SplitCounts> counts;
  switch (o.split_mode) {
    case SplitMode::kCanonical:
      if (!table) {
        throw ConfigError("genre totals do not match the canonical 930-song split; use --split-counts proportional");
      }
      counts = canonical_split_counts();
      break;
    case SplitMode::kProportional: counts = proportional_counts(m.genre_totals()); break;
    case SplitMode::kAuto:
      if (table) {
        counts = canonical_split_counts();
      } else {
        counts = proportional_counts(m.genre_totals());
        m.warnings.push_back("genre totals (" + std::to_string(m.entries.size()) +
                             " songs) do not match the canonical 930-song split; using proportional split sizes");
      }
      break;
  }
  m.splits = assign_splits(m, counts, derive_seed(o.seed, "splits"));
  return m;
}

}  // namespace percepta
