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
#include <vector>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/metrics/filters.hpp"
#include "percepta/metrics/params.hpp"
#include "percepta/metrics/pyramid.hpp"

namespace percepta {

/// z = y / (sigma_dn + norm_kernel * |y|) applied to every stage.
inline Pyramid divisive_normalize(const Pyramid& p, const NlpdParams& params) {
  Pyramid out;
  out.bands.reserve(p.bands.size());
  auto normalize_stage = [&](const Matrix& y) {
    Matrix mag(y.rows(), y.cols());
    auto m = mag.values();
    auto yv = y.values();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(yv[i]);
    const Matrix pooled = filters::correlate2d_mirror(mag, params.norm_kernel);
    Matrix z(y.rows(), y.cols());
    auto zv = z.values();
    auto pv = pooled.values();
    for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = yv[i] / (params.sigma_dn + pv[i]);
    return z;
  };
  for (const auto& band : p.bands) out.bands.push_back(normalize_stage(band));
  out.residual = normalize_stage(p.residual);
  return out;
}

/// Depth actually used for an input: the configured depth capped by size.
inline std::size_t nlpd_effective_depth(std::size_t rows, std::size_t cols, const NlpdParams& params) {
  const std::size_t d = std::min(params.depth, max_pyramid_depth(rows, cols));
  if (d == 0) {
    throw InputError("nlpd: input " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " too small for a pyramid (needs min dimension >= 4)");
  }
  return d;
}

/// Normalized pyramid of one signal. Reusable across many distance evaluations.
inline Pyramid nlpd_transform(const Matrix& x, const NlpdParams& params) {
  const std::size_t depth = nlpd_effective_depth(x.rows(), x.cols(), params);
  return divisive_normalize(laplacian_pyramid(x, depth, params.gen_kernel), params);
}

/// Mean over stages of the RMS difference between two normalized pyramids.
inline double nlpd_between(const Pyramid& za, const Pyramid& zb) {
  if (za.stages() != zb.stages()) throw InputError("nlpd: pyramids have different depths");
  double total = 0.0;
  for (std::size_t s = 0; s < za.stages(); ++s) {
    const auto a = za.stage(s).values();
    const auto b = zb.stage(s).values();
    if (a.size() != b.size()) throw InputError("nlpd: stage shapes differ");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sq += d * d;
    }
    total += std::sqrt(sq / static_cast<double>(a.size()));
  }
  return total / static_cast<double>(za.stages());
}

inline double nlpd(const Matrix& a, const Matrix& b, const NlpdParams& params = {}) {
  if (!a.same_shape(b)) {
    throw InputError("nlpd: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  return nlpd_between(nlpd_transform(a, params), nlpd_transform(b, params));
}

/// Derivative of nlpd(reference, candidate) with respect to candidate.
///
/// |y| uses subgradient 0 at y == 0, and a stage whose RMS difference is
/// exactly 0 contributes no gradient.
inline Matrix nlpd_gradient(const Matrix& reference, const Matrix& candidate, const NlpdParams& params = {}) {
  if (!reference.same_shape(candidate)) {
    throw InputError("nlpd: shape mismatch " + reference.shape_string() + " vs " + candidate.shape_string());
  }
  const std::size_t depth = nlpd_effective_depth(candidate.rows(), candidate.cols(), params);
  const auto& kernel = params.gen_kernel;
  const Pyramid za = nlpd_transform(reference, params);

  // Forward pass for the candidate, keeping every low-pass input.
  std::vector<Matrix> inputs{candidate};
  std::vector<filters::Separable> reduces;
  std::vector<filters::Separable> expands;
  Pyramid yb;
  for (std::size_t k = 0; k < depth; ++k) {
    const Matrix& cur = inputs.back();
    reduces.push_back(filters::reduce2d(cur.rows(), cur.cols(), kernel));
    Matrix low = reduces.back().apply(cur);
    expands.push_back(filters::expand2d(low.rows(), low.cols(), cur.rows(), cur.cols(), kernel));
    yb.bands.push_back(cur - expands.back().apply(low));
    inputs.push_back(std::move(low));
  }
  yb.residual = inputs.back();

  const std::size_t stages = yb.stages();
  std::vector<Matrix> d_stage(stages);
  for (std::size_t s = 0; s < stages; ++s) {
    const Matrix& y = yb.stage(s);
    const auto yv = y.values();
    Matrix mag(y.rows(), y.cols());
    auto mv = mag.values();
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = std::abs(yv[i]);
    const Matrix pooled = filters::correlate2d_mirror(mag, params.norm_kernel);
    const auto pv = pooled.values();
    const auto av = za.stage(s).values();

    const std::size_t n = yv.size();
    std::vector<double> diff(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double den = params.sigma_dn + pv[i];
      diff[i] = yv[i] / den - av[i];
      sq += diff[i] * diff[i];
    }
    Matrix dy(y.rows(), y.cols());
    const double rms = std::sqrt(sq / static_cast<double>(n));
    if (rms == 0.0) {
      d_stage[s] = std::move(dy);
      continue;
    }
    const double scale = 1.0 / (static_cast<double>(stages) * static_cast<double>(n) * rms);
    Matrix d_pooled(y.rows(), y.cols());
    auto dyv = dy.values();
    auto dpv = d_pooled.values();
    for (std::size_t i = 0; i < n; ++i) {
      const double den = params.sigma_dn + pv[i];
      const double dz = scale * diff[i];
      dyv[i] = dz / den;
      dpv[i] = -dz * yv[i] / (den * den);
    }
    const Matrix d_mag = filters::correlate2d_mirror_adjoint(d_pooled, params.norm_kernel);
    const auto dmv = d_mag.values();
    for (std::size_t i = 0; i < n; ++i) {
      if (yv[i] > 0.0) {
        dyv[i] += dmv[i];
      } else if (yv[i] < 0.0) {
        dyv[i] -= dmv[i];
      }
    }
    d_stage[s] = std::move(dy);
  }

  // Backward through the pyramid: band_k = g_k - E_k(R_k g_k), g_{k+1} = R_k g_k.
  Matrix d_low = std::move(d_stage[depth]);
  for (std::size_t k = depth; k-- > 0;) {
    d_low -= expands[k].adjoint(d_stage[k]);
    Matrix d_in = reduces[k].adjoint(d_low);
    d_in += d_stage[k];
    d_low = std::move(d_in);
  }
  return d_low;
}

}  // namespace percepta
