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
#include <string>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/dataset/genre.hpp"

namespace percepta {

/// Mel bands x time frames, plus identity.
struct Spectrogram {
  std::string id;
  Label genre;
  Matrix data;

  std::size_t bands() const noexcept { return data.rows(); }
  std::size_t frames() const noexcept { return data.cols(); }
};

/// Magnitudes at or below this on the normalized scale count as padding.
inline constexpr double kPaddingEpsilon = 1e-10;

/// Drops leading and trailing frames whose peak magnitude is <= eps.
inline Spectrogram trim_padding(const Spectrogram& spec, double eps = kPaddingEpsilon) {
  const Matrix& m = spec.data;
  auto silent = [&](std::size_t c) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > eps) return false;
    }
    return true;
  };
  std::size_t first = 0;
  while (first < m.cols() && silent(first)) ++first;
  if (first == m.cols()) {
    throw DegenerateInputError("spectrogram '" + spec.id + "' is entirely silent");
  }
  std::size_t last = m.cols();
  while (last > first && silent(last - 1)) --last;
  Spectrogram out{spec.id, spec.genre, {}};
  out.data = (first == 0 && last == m.cols()) ? m : m.col_range(first, last - first);
  return out;
}

/// Affine map lo -> 0, hi -> 1, clamped to [0, 1].
inline Spectrogram normalize(const Spectrogram& spec, double lo, double hi) {
  if (!(hi > lo)) {
    throw ConfigError("normalize: need hi > lo, got lo=" + std::to_string(lo) + " hi=" + std::to_string(hi));
  }
  Spectrogram out = spec;
  const double scale = 1.0 / (hi - lo);
  for (double& v : out.data.values()) v = std::clamp((v - lo) * scale, 0.0, 1.0);
  return out;
}

}  // namespace percepta
