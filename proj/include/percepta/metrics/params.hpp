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
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"

namespace percepta {

/// Single- and multi-scale structural similarity settings.
struct SsimParams {
  std::size_t window_size = 11;
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  std::vector<double> scale_weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  void validate() const {
    if (window_size < 3 || window_size % 2 == 0) {
      throw ConfigError("SSIM window size must be odd and >= 3, got " + std::to_string(window_size));
    }
    if (!(window_sigma > 0) || !(k1 > 0) || !(k2 > 0) || !(dynamic_range > 0)) {
      throw ConfigError("SSIM sigma, k1, k2 and dynamic range must be positive");
    }
    if (scale_weights.empty()) throw ConfigError("MS-SSIM needs at least one scale weight");
    double sum = 0.0;
    for (double w : scale_weights) {
      if (!(w > 0)) throw ConfigError("MS-SSIM scale weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-3) {
      throw ConfigError("MS-SSIM scale weights must sum to 1, got " + std::to_string(sum));
    }
  }
};

/// Normalized Laplacian pyramid distance settings.
struct NlpdParams {
  std::size_t depth = 5;
  std::vector<double> gen_kernel{0.05, 0.25, 0.40, 0.25, 0.05};
  Matrix norm_kernel = default_norm_kernel({0.05, 0.25, 0.40, 0.25, 0.05});
  double sigma_dn = 0.17;

  /// Outer product of the generating kernel, center zeroed, renormalized to 1.
  static Matrix default_norm_kernel(const std::vector<double>& g) {
    const std::size_t k = g.size();
    Matrix m(k, k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        m(i, j) = (i == k / 2 && j == k / 2) ? 0.0 : g[i] * g[j];
        sum += m(i, j);
      }
    }
    return m * (1.0 / sum);
  }

  void validate() const {
    if (depth < 1) throw ConfigError("NLPD depth must be >= 1");
    const std::size_t k = gen_kernel.size();
    if (k == 0 || k % 2 == 0) throw ConfigError("generating kernel must have odd length");
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(gen_kernel[i] > 0)) throw ConfigError("generating kernel entries must be positive");
      if (gen_kernel[i] != gen_kernel[k - 1 - i]) throw ConfigError("generating kernel must be symmetric");
      sum += gen_kernel[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("generating kernel must sum to 1");
    if (norm_kernel.rows() != norm_kernel.cols() || norm_kernel.rows() % 2 == 0) {
      throw ConfigError("normalization kernel must be square with odd size");
    }
    for (double v : norm_kernel.values()) {
      if (!(v >= 0)) throw ConfigError("normalization kernel must be non-negative");
    }
    const std::size_t c = norm_kernel.rows() / 2;
    if (norm_kernel(c, c) != 0.0) throw ConfigError("normalization kernel center must be 0");
    if (!(sigma_dn > 0)) throw ConfigError("sigma_dn must be positive");
  }
};

/// Parameters for all metrics, carried together so one config echo covers them.
struct MetricConfig {
  SsimParams ssim;
  NlpdParams nlpd;

  void validate() const {
    ssim.validate();
    nlpd.validate();
  }
};

inline nlohmann::json to_json(const SsimParams& p) {
  return {{"window_size", p.window_size}, {"window_sigma", p.window_sigma}, {"k1", p.k1},
          {"k2", p.k2}, {"dynamic_range", p.dynamic_range}, {"scale_weights", p.scale_weights}};
}

inline nlohmann::json to_json(const NlpdParams& p) {
  std::vector<std::vector<double>> nk(p.norm_kernel.rows());
  for (std::size_t i = 0; i < p.norm_kernel.rows(); ++i) {
    nk[i].assign(p.norm_kernel.row(i).begin(), p.norm_kernel.row(i).end());
  }
  return {{"depth", p.depth}, {"gen_kernel", p.gen_kernel}, {"norm_kernel", nk},
          {"sigma_dn", p.sigma_dn}};
}

inline nlohmann::json to_json(const MetricConfig& c) {
  return {{"ssim", to_json(c.ssim)}, {"nlpd", to_json(c.nlpd)}};
}

/// Reads a `metrics` block; absent keys keep their defaults.
inline MetricConfig metric_config_from_json(const nlohmann::json& j) {
  MetricConfig c;
  if (j.contains("ssim")) {
    const auto& s = j.at("ssim");
    c.ssim.window_size = s.value("window_size", c.ssim.window_size);
    c.ssim.window_sigma = s.value("window_sigma", c.ssim.window_sigma);
    c.ssim.k1 = s.value("k1", c.ssim.k1);
    c.ssim.k2 = s.value("k2", c.ssim.k2);
    c.ssim.dynamic_range = s.value("dynamic_range", c.ssim.dynamic_range);
    c.ssim.scale_weights = s.value("scale_weights", c.ssim.scale_weights);
  }
  if (j.contains("nlpd")) {
    const auto& n = j.at("nlpd");
    c.nlpd.depth = n.value("depth", c.nlpd.depth);
    c.nlpd.sigma_dn = n.value("sigma_dn", c.nlpd.sigma_dn);
    if (n.contains("gen_kernel")) {
      c.nlpd.gen_kernel = n.at("gen_kernel").get<std::vector<double>>();
      c.nlpd.norm_kernel = NlpdParams::default_norm_kernel(c.nlpd.gen_kernel);
    }
    if (n.contains("norm_kernel")) {
      const auto rows = n.at("norm_kernel").get<std::vector<std::vector<double>>>();
      Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) throw ConfigError("ragged norm_kernel");
        for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = rows[i][k];
      }
      c.nlpd.norm_kernel = std::move(m);
    }
  }
  c.validate();
  return c;
}

}  // namespace percepta
