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
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percepta/core/error.hpp"
#include "percepta/core/parallel.hpp"
#include "percepta/core/rng.hpp"
#include "percepta/dataset/genre.hpp"
#include "percepta/dataset/spectrogram.hpp"
#include "percepta/dataset/spectrogram_io.hpp"

namespace percepta {

struct ManifestEntry {
  std::string id;
  Label genre;
  std::string path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// id -> split.
using SplitAssignment = std::map<std::string, Split>;

struct DatasetManifest {
  std::vector<ManifestEntry> entries;  // sorted by id
  std::set<std::string> excluded;
  std::optional<ValueRange> value_range;
  SplitAssignment splits;
  std::vector<std::string> warnings;

  std::map<Label, std::size_t> genre_totals() const {
    std::map<Label, std::size_t> totals;
    for (const auto& e : entries) ++totals[e.genre];
    return totals;
  }

  std::map<std::string, Label> genre_of() const {
    std::map<std::string, Label> m;
    for (const auto& e : entries) m[e.id] = e.genre;
    return m;
  }
};

/// Strips a known spectrogram/audio extension, leaving the id.
inline std::string id_from_name(const std::string& name) {
  const std::filesystem::path p(name);
  return is_spectrogram_file(p) ? p.stem().string() : name;
}

/// Exclusion list: one id per line; blank lines and '#' comments ignored.
inline std::set<std::string> read_exclusion_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open exclusion list '" + path + "'");
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const auto b = line.find_last_not_of(" \t\r");
    ids.insert(id_from_name(line.substr(a, b - a + 1)));
  }
  return ids;
}

/// Scans root/<genre>/<file> for .spc, .csv and .wav files, dropping
/// excluded ids. Exclusions absent from the corpus only produce warnings.
inline DatasetManifest build_manifest(const std::string& root, const std::set<std::string>& exclusions) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ConfigError("dataset root '" + root + "' does not exist or is not a directory");
  DatasetManifest m;
  std::set<std::string> seen;
  std::vector<fs::path> dirs;
  for (const auto& d : fs::directory_iterator(root)) {
    if (d.is_directory() && d.path().filename().string().front() != '.') dirs.push_back(d.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const std::string genre = dir.filename().string();
    if (!is_genre(genre)) throw IngestionError("unknown genre directory '" + dir.string() + "'");
    for (const auto& f : fs::directory_iterator(dir)) {
      if (!f.is_regular_file() || !is_spectrogram_file(f.path())) continue;
      const std::string id = f.path().stem().string();
      if (!seen.insert(id).second) throw IngestionError("duplicate id '" + id + "' under '" + dir.string() + "'");
      if (exclusions.count(id)) {
        m.excluded.insert(id);
        continue;
      }
      m.entries.push_back({id, genre, f.path().string()});
    }
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  for (const auto& id : exclusions) {
    if (!seen.count(id)) m.warnings.push_back("excluded id '" + id + "' not found in corpus");
  }
  return m;
}

inline DatasetManifest build_manifest(const std::string& root, const std::string& exclusion_list) {
  return build_manifest(root, read_exclusion_list(exclusion_list));
}

/// Global min/max over every spectrogram value in the manifest.
inline ValueRange compute_value_range(const DatasetManifest& m, std::size_t threads = 1, const MelParams& mel = {}) {
  std::vector<ValueRange> per(m.entries.size());
  parallel_for(m.entries.size(), threads, [&](std::size_t i) {
    const Matrix x = load_spectrogram_matrix(m.entries[i].path, mel);
    const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
    per[i] = {*lo, *hi};
  });
  ValueRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : per) {
    r.lo = std::min(r.lo, p.lo);
    r.hi = std::max(r.hi, p.hi);
  }
  if (per.empty()) throw ConfigError("manifest is empty");
  return r;
}

/// Within each genre: shuffle ids (sorted first) with a per-genre seeded
/// generator, then fill train, valid and test in that order.
inline SplitAssignment assign_splits(const DatasetManifest& m, const std::map<Label, SplitCounts>& counts,
                                     std::uint64_t seed) {
  std::map<Label, std::vector<std::string>> by_genre;
  for (const auto& e : m.entries) by_genre[e.genre].push_back(e.id);
  SplitAssignment out;
  for (auto& [genre, ids] : by_genre) {
    const auto it = counts.find(genre);
    if (it == counts.end()) throw ConfigError("no split counts for genre '" + genre + "'");
    if (it->second.total() != ids.size()) {
      throw ConfigError("split counts for '" + genre + "' sum to " + std::to_string(it->second.total()) +
                        " but the manifest has " + std::to_string(ids.size()) + " songs");
    }
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, "splits/" + genre));
    rng.shuffle(ids);
    std::size_t i = 0;
    for (; i < it->second.train; ++i) out[ids[i]] = Split::kTrain;
    for (; i < it->second.train + it->second.valid; ++i) out[ids[i]] = Split::kValid;
    for (; i < ids.size(); ++i) out[ids[i]] = Split::kTest;
  }
  return out;
}

/// Split sizes scaled from the canonical split's overall 443/197/290 ratio.
inline std::map<Label, SplitCounts> proportional_counts(const std::map<Label, std::size_t>& totals) {
  std::map<Label, SplitCounts> out;
  for (const auto& [genre, n] : totals) {
    const auto train = static_cast<std::size_t>(static_cast<double>(n) * 443.0 / 930.0 + 0.5);
    const auto valid = static_cast<std::size_t>(static_cast<double>(n) * 197.0 / 930.0 + 0.5);
    out[genre] = {train, std::min(valid, n - train), n - train - std::min(valid, n - train)};
  }
  return out;
}

/// True when the manifest's genre totals are exactly those of the table.
inline bool matches_canonical_totals(const DatasetManifest& m) {
  const auto totals = m.genre_totals();
  if (totals.size() != canonical_split_counts().size()) return false;
  for (const auto& [genre, c] : canonical_split_counts()) {
    const auto it = totals.find(genre);
    if (it == totals.end() || it->second != c.total()) return false;
  }
  return true;
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "valid") return Split::kValid;
  if (s == "test") return Split::kTest;
  throw FormatError("unknown split '" + s + "'");
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j{{"id", e.id}, {"genre", e.genre}, {"path", e.path}};
    if (auto it = m.splits.find(e.id); it != m.splits.end()) j["split"] = std::string(split_name(it->second));
    entries.push_back(std::move(j));
  }
  nlohmann::json j{{"entries", entries}, {"excluded", std::vector<std::string>(m.excluded.begin(), m.excluded.end())}};
  if (m.value_range) j["value_range"] = {{"lo", m.value_range->lo}, {"hi", m.value_range->hi}};
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("id").get<std::string>(), e.at("genre").get<std::string>(),
                           e.at("path").get<std::string>()});
      if (e.contains("split")) m.splits[m.entries.back().id] = parse_split(e.at("split").get<std::string>());
    }
    if (j.contains("excluded")) {
      for (const auto& id : j.at("excluded")) m.excluded.insert(id.get<std::string>());
    }
    if (j.contains("value_range")) {
      m.value_range = ValueRange{j.at("value_range").at("lo").get<double>(), j.at("value_range").at("hi").get<double>()};
    }
    if (j.contains("splits")) {
      for (const auto& [id, s] : j.at("splits").items()) m.splits[id] = parse_split(s.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  for (const auto& e : m.entries) {
    if (m.excluded.count(e.id)) throw FormatError("manifest: id '" + e.id + "' is both an entry and excluded");
  }
  return m;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

inline DatasetManifest load_manifest(const std::string& path) { return manifest_from_json(read_json_file(path)); }

/// Loads every entry as a normalized, padding-trimmed spectrogram.
inline std::vector<Spectrogram> load_prepared(const DatasetManifest& m, bool trim, std::size_t threads = 1,
                                              const MelParams& mel = {}) {
  if (!m.value_range) throw ConfigError("manifest has no value_range; run prepare first");
  std::vector<Spectrogram> out(m.entries.size());
  parallel_for(m.entries.size(), threads, [&](std::size_t i) {
    const auto& e = m.entries[i];
    Spectrogram s{e.id, e.genre, load_spectrogram_matrix(e.path, mel)};
    s = normalize(s, m.value_range->lo, m.value_range->hi);
    out[i] = trim ? trim_padding(s) : std::move(s);
  });
  return out;
}

}  // namespace percepta
