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

// Shared helpers for the test suites: seeded random matrices, conversion to
// oracle grids, and a central finite-difference gradient.

#include <cmath>
#include <cstdint>
#include <functional>

#include "percepta/core/matrix.hpp"
#include "percepta/core/rng.hpp"
#include "reference_metrics.hpp"

namespace testing_support {

inline percepta::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = 0.0,
                                      double hi = 1.0) {
  percepta::Rng rng(seed);
  percepta::Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline oracle::Grid to_grid(const percepta::Matrix& m) {
  oracle::Grid g(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

/// Central differences of f at x with step h, one coordinate at a time.
inline percepta::Matrix finite_difference(const std::function<double(const percepta::Matrix&)>& f,
                                          const percepta::Matrix& x, double h) {
  percepta::Matrix g(x.rows(), x.cols());
  percepta::Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.values()[i];
    probe.values()[i] = orig + h;
    const double up = f(probe);
    probe.values()[i] = orig - h;
    const double down = f(probe);
    probe.values()[i] = orig;
    g.values()[i] = (up - down) / (2 * h);
  }
  return g;
}

struct GradientCheck {
  double max_relative = 0.0;  // over entries with |analytic| >= floor
  double max_absolute = 0.0;  // over entries with |analytic| < floor
};

/// Relative error |a - n| / |a| where |a| >= floor, absolute error elsewhere.
inline GradientCheck compare_gradients(const percepta::Matrix& analytic, const percepta::Matrix& numeric,
                                       double floor = 1e-8) {
  GradientCheck out;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.values()[i];
    const double n = numeric.values()[i];
    if (std::fabs(a) < floor) {
      out.max_absolute = std::max(out.max_absolute, std::fabs(a - n));
    } else {
      out.max_relative = std::max(out.max_relative, std::fabs(a - n) / std::fabs(a));
    }
  }
  return out;
}

}  // namespace testing_support
