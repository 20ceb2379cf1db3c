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

namespace percepta {

namespace detail {

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  auto o = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  return out;
}

inline double mean(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v;
  return s / static_cast<double>(m.size());
}

/// Local statistics and per-position SSIM terms at one resolution.
///
/// `x` is the reference and `y` the candidate; the backward pass returns the
/// derivative with respect to `y` only.
struct SsimScale {
  filters::Separable window;
  Matrix x, y;
  Matrix mu_x, mu_y, sxx, syy, sxy;
  Matrix cs_map, l_map;
  bool with_luminance = false;
  double value = 0.0;

  SsimScale(const Matrix& ref, const Matrix& cand, const SsimParams& p, bool luminance)
      : x(ref), y(cand), with_luminance(luminance) {
    const auto kernel = filters::gaussian_kernel(p.window_size, p.window_sigma);
    window = filters::valid2d(x.rows(), x.cols(), kernel);
    mu_x = window.apply(x);
    mu_y = window.apply(y);
    sxx = window.apply(hadamard(x, x));
    syy = window.apply(hadamard(y, y));
    sxy = window.apply(hadamard(x, y));
    const double c1 = p.c1();
    const double c2 = p.c2();
    cs_map = Matrix(mu_x.rows(), mu_x.cols());
    l_map = Matrix(mu_x.rows(), mu_x.cols(), 1.0);
    auto mx = mu_x.values();
    auto my = mu_y.values();
    auto vxx = sxx.values();
    auto vyy = syy.values();
    auto vxy = sxy.values();
    auto cs = cs_map.values();
    auto l = l_map.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      vxx[i] -= mx[i] * mx[i];
      vyy[i] -= my[i] * my[i];
      vxy[i] -= mx[i] * my[i];
      cs[i] = (2.0 * vxy[i] + c2) / (vxx[i] + vyy[i] + c2);
      if (with_luminance) {
        l[i] = (2.0 * mx[i] * my[i] + c1) / (mx[i] * mx[i] + my[i] * my[i] + c1);
      }
      acc += l[i] * cs[i];
    }
    value = acc / static_cast<double>(cs.size());
  }

  /// d(value)/dy scaled by `upstream`.
  Matrix backward(double upstream, const SsimParams& p) const {
    const double c1 = p.c1();
    const double c2 = p.c2();
    const double g = upstream / static_cast<double>(cs_map.size());
    Matrix d_mu_y(mu_x.rows(), mu_x.cols());
    Matrix d_eyy(mu_x.rows(), mu_x.cols());
    Matrix d_exy(mu_x.rows(), mu_x.cols());
    auto mx = mu_x.values();
    auto my = mu_y.values();
    auto vxx = sxx.values();
    auto vyy = syy.values();
    auto vxy = sxy.values();
    auto cs = cs_map.values();
    auto l = l_map.values();
    auto dmu = d_mu_y.values();
    auto dyy = d_eyy.values();
    auto dxy = d_exy.values();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const double d_cs = g * l[i];
      const double a = 2.0 * vxy[i] + c2;
      const double b = vxx[i] + vyy[i] + c2;
      const double d_a = d_cs / b;
      const double d_b = -d_cs * a / (b * b);
      const double d_sxy = 2.0 * d_a;
      const double d_syy = d_b;
      double dm = -2.0 * my[i] * d_syy - mx[i] * d_sxy;
      if (with_luminance) {
        const double d_l = g * cs[i];
        const double l1 = 2.0 * mx[i] * my[i] + c1;
        const double l2 = mx[i] * mx[i] + my[i] * my[i] + c1;
        const double d_l1 = d_l / l2;
        const double d_l2 = -d_l * l1 / (l2 * l2);
        dm += 2.0 * mx[i] * d_l1 + 2.0 * my[i] * d_l2;
      }
      dmu[i] = dm;
      dyy[i] = 2.0 * d_syy;
      dxy[i] = d_sxy;
    }
    Matrix dy = window.adjoint(d_mu_y);
    dy += hadamard(y, window.adjoint(d_eyy));
    dy += hadamard(x, window.adjoint(d_exy));
    return dy;
  }
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InputError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace detail

/// Mean local SSIM index over all fully overlapping window positions.
inline double ssim(const Matrix& a, const Matrix& b, const SsimParams& p = {}) {
  detail::require_same_shape(a, b, "ssim");
  if (std::min(a.rows(), a.cols()) < p.window_size) {
    throw InputError("ssim: image " + a.shape_string() + " smaller than window " +
                     std::to_string(p.window_size));
  }
  return detail::SsimScale(a, b, p, true).value;
}

/// Scales usable for an image of this size: the largest s <= number of
/// weights with min(rows, cols) >= window * 2^(s-1).
inline std::size_t ms_ssim_scale_count(std::size_t rows, std::size_t cols, const SsimParams& p) {
  const std::size_t m = std::min(rows, cols);
  std::size_t s = 0;
  while (s < p.scale_weights.size() && m >= p.window_size * (std::size_t{1} << s)) ++s;
  return s;
}

/// Weights for `scales` levels: the finest entries, renormalized to sum 1.
inline std::vector<double> ms_ssim_weights(std::size_t scales, const SsimParams& p) {
  std::vector<double> w(p.scale_weights.begin(), p.scale_weights.begin() + static_cast<std::ptrdiff_t>(scales));
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

namespace detail {

struct MsSsimForward {
  std::vector<SsimScale> scales;
  std::vector<filters::Separable> pools;  // pools[s] maps scale s to s + 1
  std::vector<double> weights;
  double value = 0.0;
  bool clamped = false;
};

inline MsSsimForward ms_ssim_forward(const Matrix& a, const Matrix& b, const SsimParams& p) {
  require_same_shape(a, b, "ms_ssim");
  const std::size_t count = ms_ssim_scale_count(a.rows(), a.cols(), p);
  if (count == 0) {
    throw InputError("ms_ssim: image " + a.shape_string() + " smaller than window " +
                     std::to_string(p.window_size));
  }
  MsSsimForward f;
  f.weights = ms_ssim_weights(count, p);
  Matrix x = a;
  Matrix y = b;
  double product = 1.0;
  for (std::size_t s = 0; s < count; ++s) {
    const bool coarsest = s + 1 == count;
    f.scales.emplace_back(x, y, p, coarsest);
    const double v = f.scales.back().value;
    if (v <= 0.0) {
      f.clamped = true;
      product = 0.0;
    } else {
      product *= std::pow(v, f.weights[s]);
    }
    if (!coarsest) {
      f.pools.push_back(filters::pool2d(x.rows(), x.cols()));
      x = f.pools.back().apply(x);
      y = f.pools.back().apply(y);
    }
  }
  f.value = std::clamp(product, 0.0, 1.0);
  return f;
}

}  // namespace detail

/// Multi-scale SSIM: contrast-structure terms at every scale, luminance at the
/// coarsest only, each raised to its scale weight. Clamped to [0, 1].
inline double ms_ssim(const Matrix& a, const Matrix& b, const SsimParams& p = {}) {
  return detail::ms_ssim_forward(a, b, p).value;
}

/// Derivative of ms_ssim(reference, candidate) with respect to candidate.
/// Zero wherever a clamped term makes the product identically 0.
inline Matrix ms_ssim_gradient(const Matrix& reference, const Matrix& candidate,
                               const SsimParams& p = {}) {
  const auto f = detail::ms_ssim_forward(reference, candidate, p);
  if (f.clamped || f.value <= 0.0) return Matrix(candidate.rows(), candidate.cols());
  const std::size_t count = f.scales.size();
  Matrix carry;
  for (std::size_t s = count; s-- > 0;) {
    const auto& sc = f.scales[s];
    const double upstream = f.value * f.weights[s] / sc.value;
    Matrix dy = sc.backward(upstream, p);
    if (s + 1 < count) dy += f.pools[s].adjoint(carry);
    carry = std::move(dy);
  }
  return carry;
}

}  // namespace percepta
