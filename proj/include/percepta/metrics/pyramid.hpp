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
#include <span>
#include <string>
#include <vector>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/metrics/filters.hpp"

namespace percepta {

/// Band-pass levels (finest first) plus the final low-pass residual.
struct Pyramid {
  std::vector<Matrix> bands;
  Matrix residual;

  std::size_t depth() const noexcept { return bands.size(); }
  /// Number of stages: every band and the residual.
  std::size_t stages() const noexcept { return bands.size() + 1; }
  const Matrix& stage(std::size_t s) const { return s < bands.size() ? bands[s] : residual; }
  Matrix& stage(std::size_t s) { return s < bands.size() ? bands[s] : residual; }
};

/// Deepest pyramid with min(rows, cols) / 2^(depth-1) >= 4; 0 if none fits.
inline std::size_t max_pyramid_depth(std::size_t rows, std::size_t cols) {
  const std::size_t m = std::min(rows, cols);
  std::size_t d = 0;
  while (m >= 4 * (std::size_t{1} << d)) ++d;
  return d;
}

inline std::size_t halved(std::size_t n) { return (n + 1) / 2; }

/// Burt-Adelson Laplacian pyramid with a separable generating kernel.
///
/// band_k = g_k - expand(reduce(g_k)), g_{k+1} = reduce(g_k), g_0 = x.
inline Pyramid laplacian_pyramid(const Matrix& x, std::size_t depth, std::span<const double> kernel) {
  if (depth < 1) throw ConfigError("pyramid depth must be >= 1");
  const std::size_t max_depth = max_pyramid_depth(x.rows(), x.cols());
  if (depth > max_depth) {
    throw ConfigError("pyramid depth " + std::to_string(depth) + " too large for " + x.shape_string() +
                      " input; maximum feasible depth is " + std::to_string(max_depth));
  }
  Pyramid p;
  p.bands.reserve(depth);
  Matrix current = x;
  for (std::size_t k = 0; k < depth; ++k) {
    Matrix low = filters::reduce2d(current.rows(), current.cols(), kernel).apply(current);
    Matrix up = filters::expand2d(low.rows(), low.cols(), current.rows(), current.cols(), kernel).apply(low);
    p.bands.push_back(current - up);
    current = std::move(low);
  }
  p.residual = std::move(current);
  return p;
}

/// Inverse of laplacian_pyramid: expand from the residual and add each band.
inline Matrix collapse(const Pyramid& p, std::span<const double> kernel) {
  if (p.bands.empty()) throw InputError("collapse: pyramid has no bands");
  Matrix out = p.residual;
  for (std::size_t k = p.bands.size(); k-- > 0;) {
    const Matrix& band = p.bands[k];
    if (out.rows() != halved(band.rows()) || out.cols() != halved(band.cols())) {
      throw InputError("collapse: level " + std::to_string(k) + " has shape " + band.shape_string() +
                       " but the next coarser level is " + out.shape_string());
    }
    out = band + filters::expand2d(out.rows(), out.cols(), band.rows(), band.cols(), kernel).apply(out);
  }
  return out;
}

}  // namespace percepta
