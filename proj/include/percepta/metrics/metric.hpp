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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/metrics/nlpd.hpp"
#include "percepta/metrics/params.hpp"
#include "percepta/metrics/ssim.hpp"

namespace percepta {

enum class MetricKind : std::uint16_t { kMse = 0, kOneMinusMsSsim = 1, kNlpd = 2 };

/// All kinds in reporting order.
inline constexpr std::array<MetricKind, 3> kAllMetrics{MetricKind::kMse, MetricKind::kOneMinusMsSsim,
                                                       MetricKind::kNlpd};

/// Command-line token: mse, msssim, nlpd.
inline std::string_view metric_token(MetricKind k) {
  switch (k) {
    case MetricKind::kMse: return "mse";
    case MetricKind::kOneMinusMsSsim: return "msssim";
    case MetricKind::kNlpd: return "nlpd";
  }
  return "?";
}

/// Human-readable label used in report tables.
inline std::string_view metric_label(MetricKind k) {
  switch (k) {
    case MetricKind::kMse: return "MSE";
    case MetricKind::kOneMinusMsSsim: return "1-MS-SSIM";
    case MetricKind::kNlpd: return "NLPD";
  }
  return "?";
}

inline MetricKind parse_metric(std::string_view token) {
  for (auto k : kAllMetrics) {
    if (token == metric_token(k)) return k;
  }
  throw ConfigError("unknown metric '" + std::string(token) + "' (expected mse, msssim or nlpd)");
}

inline MetricKind metric_from_tag(std::uint16_t tag) {
  if (tag > 2) throw FormatError("unknown metric tag " + std::to_string(tag));
  return static_cast<MetricKind>(tag);
}

inline double mse(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw InputError("mse: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  if (a.empty()) throw InputError("mse: empty input");
  const auto av = a.values();
  const auto bv = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    s += d * d;
  }
  return s / static_cast<double>(av.size());
}

inline double distance(MetricKind kind, const Matrix& a, const Matrix& b, const MetricConfig& cfg = {}) {
  switch (kind) {
    case MetricKind::kMse: return mse(a, b);
    case MetricKind::kOneMinusMsSsim: return 1.0 - ms_ssim(a, b, cfg.ssim);
    case MetricKind::kNlpd: return nlpd(a, b, cfg.nlpd);
  }
  throw ConfigError("unknown metric kind");
}

/// d distance(kind, reference, candidate) / d candidate.
inline Matrix metric_gradient(MetricKind kind, const Matrix& reference, const Matrix& candidate,
                              const MetricConfig& cfg = {}) {
  switch (kind) {
    case MetricKind::kMse: {
      if (!reference.same_shape(candidate)) {
        throw InputError("mse: shape mismatch " + reference.shape_string() + " vs " + candidate.shape_string());
      }
      return (candidate - reference) * (2.0 / static_cast<double>(candidate.size()));
    }
    case MetricKind::kOneMinusMsSsim:
      return ms_ssim_gradient(reference, candidate, cfg.ssim) * -1.0;
    case MetricKind::kNlpd:
      return nlpd_gradient(reference, candidate, cfg.nlpd);
  }
  throw ConfigError("unknown metric kind");
}

}  // namespace percepta
