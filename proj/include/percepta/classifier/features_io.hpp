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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "percepta/core/error.hpp"
#include "percepta/core/hash.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/dataset/genre.hpp"

// features.csv: optional "# config_hash=xxxxxxxx" line, a header
// "id,genre,f0,...", then one row per song.

namespace percepta {

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<Label> genres;
  Matrix values;  // songs x dims
};

inline void write_features_csv(const FeatureTable& t, const std::string& path,
                               std::optional<std::uint32_t> config_hash = std::nullopt) {
  if (t.ids.size() != t.values.rows() || t.genres.size() != t.values.rows()) {
    throw InputError("feature table columns disagree on row count");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_hash_line(out, config_hash);
  out << "id,genre";
  for (std::size_t c = 0; c < t.values.cols(); ++c) out << ",f" << c;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < t.values.rows(); ++r) {
    out << t.ids[r] << ',' << t.genres[r];
    for (double v : t.values.row(r)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

struct LoadedFeatures {
  FeatureTable table;
  std::optional<std::uint32_t> config_hash;
};

inline LoadedFeatures read_features_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  LoadedFeatures out;
  std::string line;
  std::size_t line_no = 0, dims = 0;
  bool header = false;
  std::vector<double> values;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!s.empty() && s.back() == ',') f.emplace_back();
    return f;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(kHashLinePrefix, 0) == 0) {
        out.config_hash = parse_hash(std::string_view(line).substr(kHashLinePrefix.size()));
        if (!out.config_hash) throw FormatError("'" + path + "': malformed config hash line");
      }
      continue;
    }
    const auto f = split(line);
    const std::string where = "'" + path + "' line " + std::to_string(line_no);
    if (!header) {
      if (f.size() < 3 || f[0] != "id" || f[1] != "genre") throw FormatError(where + ": expected header id,genre,f0,...");
      dims = f.size() - 2;
      header = true;
      continue;
    }
    if (f.size() != dims + 2) {
      throw FormatError(where + ": " + std::to_string(f.size()) + " fields, expected " + std::to_string(dims + 2));
    }
    out.table.ids.push_back(f[0]);
    out.table.genres.push_back(f[1]);
    for (std::size_t c = 2; c < f.size(); ++c) {
      double v = 0;
      const auto res = std::from_chars(f[c].data(), f[c].data() + f[c].size(), v);
      if (f[c].empty() || res.ec != std::errc() || res.ptr != f[c].data() + f[c].size()) {
        throw FormatError(where + ": malformed number '" + f[c] + "'");
      }
      if (!std::isfinite(v)) throw DataError(where + ": non-finite feature value");
      values.push_back(v);
    }
  }
  if (!header) throw FormatError("'" + path + "': missing header");
  out.table.values = Matrix(out.table.ids.size(), dims, std::move(values));
  return out;
}

}  // namespace percepta
