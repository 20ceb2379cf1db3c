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
#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace percepta {

/// Class label. Dataset code restricts these to the ten GTZAN genres;
/// classifiers accept any label set.
using Label = std::string;

/// GTZAN genre directory names, lexicographically ordered.
inline constexpr std::array<std::string_view, 10> kGenres{
    "blues", "classical", "country", "disco", "hiphop", "jazz", "metal", "pop", "reggae", "rock"};

inline bool is_genre(std::string_view name) {
  return std::find(kGenres.begin(), kGenres.end(), name) != kGenres.end();
}

enum class Split { kTrain, kValid, kTest };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

struct SplitCounts {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;

  std::size_t total() const noexcept { return train + valid + test; }
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// Per-genre split sizes of the filtered 930-song collection.
inline const std::map<Label, SplitCounts>& canonical_split_counts() {
  static const std::map<Label, SplitCounts> counts{
      {"blues", {46, 23, 31}},  {"classical", {48, 20, 31}}, {"country", {45, 23, 30}},
      {"disco", {42, 22, 29}},  {"hiphop", {47, 18, 27}},    {"jazz", {43, 17, 27}},
      {"metal", {44, 20, 27}},  {"pop", {41, 13, 30}},       {"reggae", {43, 17, 26}},
      {"rock", {44, 24, 32}},
  };
  return counts;
}

}  // namespace percepta
