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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"

// Separable linear filtering primitives with exact adjoints.
//
// Every 1-D operator used by the metrics (blur, reduce, expand, valid
// Gaussian window, mean-pool) is a Stencil1D: a fixed number of taps per
// output sample, each tap a (source index, weight) pair. Boundary handling is
// baked into the source indices, which makes the adjoint a plain scatter of
// the same taps. Gradients of the metrics are built from these adjoints.

namespace percepta::filters {

/// Half-sample symmetric boundary: ... c b a | a b c | c b a ...
/// Valid for any integer index and any n >= 1.
inline std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t p = i % period;
  if (p < 0) p += period;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(p < sn ? p : period - 1 - p);
}

struct Stencil1D {
  std::size_t in_size = 0;
  std::size_t out_size = 0;
  std::size_t taps = 0;
  std::vector<std::size_t> src;  // out_size * taps
  std::vector<double> weight;    // out_size * taps
};

/// Same-size correlation with a centered odd kernel, mirror-padded.
inline Stencil1D blur_stencil(std::size_t n, std::span<const double> kernel) {
  const std::size_t k = kernel.size();
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  Stencil1D s{n, n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      s.src[i * k + t] = mirror_index(static_cast<std::ptrdiff_t>(i + t) - r, n);
      s.weight[i * k + t] = kernel[t];
    }
  }
  return s;
}

/// Blur followed by keeping even-indexed samples; output length ceil(n/2).
inline Stencil1D reduce_stencil(std::size_t n, std::span<const double> kernel) {
  const std::size_t k = kernel.size();
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t m = (n + 1) / 2;
  Stencil1D s{n, m, k, std::vector<std::size_t>(m * k), std::vector<double>(m * k)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      s.src[i * k + t] = mirror_index(static_cast<std::ptrdiff_t>(2 * i + t) - r, n);
      s.weight[i * k + t] = kernel[t];
    }
  }
  return s;
}

/// Zero-insertion upsampling from `coarse` to `fine` samples followed by a
/// blur with twice the kernel. The coarse signal is mirror-extended before
/// zero insertion, so constants map to the same constant everywhere.
inline Stencil1D expand_stencil(std::size_t coarse, std::size_t fine,
                                std::span<const double> kernel) {
  const std::size_t k = kernel.size();
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  Stencil1D s{coarse, fine, k, std::vector<std::size_t>(fine * k, 0),
              std::vector<double>(fine * k, 0.0)};
  for (std::size_t i = 0; i < fine; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(i) - (static_cast<std::ptrdiff_t>(t) - r);
      if (p % 2 != 0) continue;
      s.src[i * k + t] = mirror_index(p / 2, coarse);
      s.weight[i * k + t] = 2.0 * kernel[t];
    }
  }
  return s;
}

/// Correlation over fully overlapping positions only; output n - k + 1.
inline Stencil1D valid_stencil(std::size_t n, std::span<const double> kernel) {
  const std::size_t k = kernel.size();
  if (n < k) throw InputError("signal length " + std::to_string(n) + " shorter than window " + std::to_string(k));
  const std::size_t m = n - k + 1;
  Stencil1D s{n, m, k, std::vector<std::size_t>(m * k), std::vector<double>(m * k)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      s.src[i * k + t] = i + t;
      s.weight[i * k + t] = kernel[t];
    }
  }
  return s;
}

/// Mean of non-overlapping pairs; a trailing odd sample is dropped.
inline Stencil1D pool2_stencil(std::size_t n) {
  const std::size_t m = n / 2;
  Stencil1D s{n, m, 2, std::vector<std::size_t>(m * 2), std::vector<double>(m * 2, 0.5)};
  for (std::size_t i = 0; i < m; ++i) {
    s.src[i * 2] = 2 * i;
    s.src[i * 2 + 1] = 2 * i + 1;
  }
  return s;
}

/// Applies `s` along the column index of every row (horizontal pass).
inline Matrix apply_horizontal(const Matrix& x, const Stencil1D& s) {
  if (x.cols() != s.in_size) throw InputError("horizontal stencil size mismatch");
  Matrix out(x.rows(), s.out_size);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto in = x.row(r);
    auto o = out.row(r);
    for (std::size_t i = 0; i < s.out_size; ++i) {
      double acc = 0.0;
      const std::size_t base = i * s.taps;
      for (std::size_t t = 0; t < s.taps; ++t) acc += s.weight[base + t] * in[s.src[base + t]];
      o[i] = acc;
    }
  }
  return out;
}

/// Applies `s` along the row index of every column (vertical pass).
inline Matrix apply_vertical(const Matrix& x, const Stencil1D& s) {
  if (x.rows() != s.in_size) throw InputError("vertical stencil size mismatch");
  Matrix out(s.out_size, x.cols());
  for (std::size_t i = 0; i < s.out_size; ++i) {
    auto o = out.row(i);
    const std::size_t base = i * s.taps;
    for (std::size_t t = 0; t < s.taps; ++t) {
      const double w = s.weight[base + t];
      if (w == 0.0) continue;
      const auto in = x.row(s.src[base + t]);
      for (std::size_t c = 0; c < x.cols(); ++c) o[c] += w * in[c];
    }
  }
  return out;
}

inline Matrix adjoint_horizontal(const Matrix& g, const Stencil1D& s) {
  if (g.cols() != s.out_size) throw InputError("horizontal adjoint size mismatch");
  Matrix out(g.rows(), s.in_size);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const auto in = g.row(r);
    auto o = out.row(r);
    for (std::size_t i = 0; i < s.out_size; ++i) {
      const std::size_t base = i * s.taps;
      for (std::size_t t = 0; t < s.taps; ++t) o[s.src[base + t]] += s.weight[base + t] * in[i];
    }
  }
  return out;
}

inline Matrix adjoint_vertical(const Matrix& g, const Stencil1D& s) {
  if (g.rows() != s.out_size) throw InputError("vertical adjoint size mismatch");
  Matrix out(s.in_size, g.cols());
  for (std::size_t i = 0; i < s.out_size; ++i) {
    const auto in = g.row(i);
    const std::size_t base = i * s.taps;
    for (std::size_t t = 0; t < s.taps; ++t) {
      const double w = s.weight[base + t];
      if (w == 0.0) continue;
      auto o = out.row(s.src[base + t]);
      for (std::size_t c = 0; c < g.cols(); ++c) o[c] += w * in[c];
    }
  }
  return out;
}

/// A separable 2-D operator: `horizontal` acts on columns, `vertical` on rows.
struct Separable {
  Stencil1D vertical;
  Stencil1D horizontal;

  Matrix apply(const Matrix& x) const { return apply_vertical(apply_horizontal(x, horizontal), vertical); }
  Matrix adjoint(const Matrix& g) const {
    return adjoint_horizontal(adjoint_vertical(g, vertical), horizontal);
  }
};

inline Separable blur2d(std::size_t rows, std::size_t cols, std::span<const double> kernel) {
  return {blur_stencil(rows, kernel), blur_stencil(cols, kernel)};
}
inline Separable reduce2d(std::size_t rows, std::size_t cols, std::span<const double> kernel) {
  return {reduce_stencil(rows, kernel), reduce_stencil(cols, kernel)};
}
inline Separable expand2d(std::size_t coarse_rows, std::size_t coarse_cols, std::size_t fine_rows,
                          std::size_t fine_cols, std::span<const double> kernel) {
  return {expand_stencil(coarse_rows, fine_rows, kernel), expand_stencil(coarse_cols, fine_cols, kernel)};
}
inline Separable valid2d(std::size_t rows, std::size_t cols, std::span<const double> kernel) {
  return {valid_stencil(rows, kernel), valid_stencil(cols, kernel)};
}
inline Separable pool2d(std::size_t rows, std::size_t cols) {
  return {pool2_stencil(rows), pool2_stencil(cols)};
}

inline std::vector<std::size_t> mirror_map(std::size_t n, std::ptrdiff_t shift) {
  std::vector<std::size_t> m(n);
  for (std::size_t j = 0; j < n; ++j) m[j] = mirror_index(static_cast<std::ptrdiff_t>(j) + shift, n);
  return m;
}

/// Non-separable same-size correlation with a square odd kernel, mirror-padded.
inline Matrix correlate2d_mirror(const Matrix& x, const Matrix& kernel) {
  const std::size_t k = kernel.rows();
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  Matrix out(x.rows(), x.cols());
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double w = kernel(a, b);
      if (w == 0.0) continue;
      const auto cmap = mirror_map(x.cols(), static_cast<std::ptrdiff_t>(b) - r);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto src = x.row(mirror_index(static_cast<std::ptrdiff_t>(i + a) - r, x.rows()));
        auto o = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) o[j] += w * src[cmap[j]];
      }
    }
  }
  return out;
}

inline Matrix correlate2d_mirror_adjoint(const Matrix& g, const Matrix& kernel) {
  const std::size_t k = kernel.rows();
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  Matrix out(g.rows(), g.cols());
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double w = kernel(a, b);
      if (w == 0.0) continue;
      const auto cmap = mirror_map(g.cols(), static_cast<std::ptrdiff_t>(b) - r);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        auto dst = out.row(mirror_index(static_cast<std::ptrdiff_t>(i + a) - r, g.rows()));
        const auto in = g.row(i);
        for (std::size_t j = 0; j < g.cols(); ++j) dst[cmap[j]] += w * in[j];
      }
    }
  }
  return out;
}

/// Normalized 1-D Gaussian of odd length.
inline std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double c = static_cast<double>(size / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace percepta::filters
