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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "percepta/core/binary_io.hpp"
#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/core/parallel.hpp"
#include "percepta/dataset/spectrogram.hpp"
#include "percepta/metrics/metric.hpp"

namespace percepta {

/// How two spectrograms with different frame counts are made comparable.
enum class AlignmentPolicy : std::uint16_t {
  kTruncateLeft = 0,  ///< keep the earliest frames of both, up to the shorter length
  kCenterCrop = 1,    ///< crop the longer one symmetrically around its center
};

inline std::string_view policy_token(AlignmentPolicy p) {
  return p == AlignmentPolicy::kTruncateLeft ? "truncate-left" : "center-crop";
}

inline AlignmentPolicy parse_policy(std::string_view s) {
  if (s == "truncate-left") return AlignmentPolicy::kTruncateLeft;
  if (s == "center-crop") return AlignmentPolicy::kCenterCrop;
  throw ConfigError("unknown alignment policy '" + std::string(s) + "'");
}

inline Matrix crop_frames(const Matrix& m, std::size_t frames, AlignmentPolicy policy) {
  if (m.cols() == frames) return m;
  const std::size_t start = policy == AlignmentPolicy::kTruncateLeft ? 0 : (m.cols() - frames) / 2;
  return m.col_range(start, frames);
}

struct DistanceMatrix {
  std::vector<std::string> ids;
  Matrix values;
  MetricKind metric = MetricKind::kMse;
  AlignmentPolicy policy = AlignmentPolicy::kTruncateLeft;
  std::uint32_t config_hash = 0;

  std::size_t size() const noexcept { return ids.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }

  std::size_t index_of(const std::string& id) const {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw InputError("id '" + id + "' not in distance matrix");
    return static_cast<std::size_t>(it - ids.begin());
  }

  /// Zero diagonal, symmetry within 1e-9, finite and non-negative entries.
  void validate() const {
    const std::size_t n = ids.size();
    if (values.rows() != n || values.cols() != n) throw InputError("distance matrix shape does not match ids");
    for (std::size_t i = 0; i < n; ++i) {
      if (values(i, i) != 0.0) throw DataError("nonzero diagonal at '" + ids[i] + "'");
      for (std::size_t j = i + 1; j < n; ++j) {
        const double a = values(i, j), b = values(j, i);
        if (!std::isfinite(a) || !std::isfinite(b) || a < 0 || b < 0) {
          throw DataError("invalid distance between '" + ids[i] + "' and '" + ids[j] + "'");
        }
        if (std::abs(a - b) > 1e-9) throw DataError("asymmetric distance between '" + ids[i] + "' and '" + ids[j] + "'");
      }
    }
  }
};

/// Distance between one pair after alignment.
inline double pair_distance(const Spectrogram& a, const Spectrogram& b, MetricKind kind, AlignmentPolicy policy,
                            const MetricConfig& cfg) {
  const std::size_t frames = std::min(a.frames(), b.frames());
  return distance(kind, crop_frames(a.data, frames, policy), crop_frames(b.data, frames, policy), cfg);
}

/// Every unordered pair is evaluated once, in parallel over a fixed
/// partition of the upper triangle. Values land in per-pair slots, so the
/// result does not depend on `threads`.
inline DistanceMatrix compute_pairwise(const std::vector<Spectrogram>& specs, MetricKind kind, AlignmentPolicy policy,
                                       const MetricConfig& cfg = {}, std::size_t threads = 1) {
  const std::size_t n = specs.size();
  if (n < 2) throw InputError("compute_pairwise needs at least 2 spectrograms");
  for (const auto& s : specs) {
    if (s.bands() != specs[0].bands()) {
      throw InputError("mel band count of '" + s.id + "' (" + std::to_string(s.bands()) + ") differs from '" +
                       specs[0].id + "' (" + std::to_string(specs[0].bands()) + ")");
    }
  }

  // NLPD transforms each signal independently, so full-length transforms are
  // reused for equal-length pairs. nlpd() composes the same two steps, so
  // the cached path gives bit-identical values.
  std::vector<std::optional<Pyramid>> cached(n);
  if (kind == MetricKind::kNlpd) {
    parallel_for(n, threads, [&](std::size_t i) { cached[i] = nlpd_transform(specs[i].data, cfg.nlpd); });
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    try {
      if (kind == MetricKind::kNlpd && specs[i].frames() == specs[j].frames()) {
        out[p] = nlpd_between(*cached[i], *cached[j]);
      } else {
        out[p] = pair_distance(specs[i], specs[j], kind, policy, cfg);
      }
      if (!std::isfinite(out[p])) throw NumericalError("non-finite distance");
    } catch (const Error& e) {
      rethrow_with_context(e, "pair ('" + specs[i].id + "', '" + specs[j].id + "')");
    }
  });

  DistanceMatrix m;
  m.metric = kind;
  m.policy = policy;
  m.values = Matrix(n, n);
  m.ids.reserve(n);
  for (const auto& s : specs) m.ids.push_back(s.id);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    m.values(i, j) = out[p];
    m.values(j, i) = out[p];
  }
  return m;
}

inline constexpr std::string_view kDmatMagic = "DMT1";

/// DMAT: "DMT1", u32 n, n u16-length-prefixed UTF-8 ids, n*n f64 row-major,
/// then u16 metric tag, u16 alignment policy tag, u32 config hash.
inline void save_matrix(const DistanceMatrix& m, const std::string& path) {
  m.validate();
  io::ByteWriter out;
  out.bytes(kDmatMagic);
  out.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& id : m.ids) out.str16(id);
  for (double v : m.values.values()) out.f64(v);
  out.u16(static_cast<std::uint16_t>(m.metric));
  out.u16(static_cast<std::uint16_t>(m.policy));
  out.u32(m.config_hash);
  out.write_file(path);
}

inline DistanceMatrix load_matrix(const std::string& path) {
  auto in = io::ByteReader::from_file(path);
  if (in.remaining() < 4 || in.bytes(4, "magic") != kDmatMagic) throw FormatError("'" + path + "': bad DMAT magic", 0);
  DistanceMatrix m;
  const std::uint32_t n = in.u32("count");
  m.ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) m.ids.push_back(in.str16("id table"));
  in.need(static_cast<std::uint64_t>(n) * n * 8 + 8, "values");
  m.values = Matrix(n, n);
  for (double& v : m.values.values()) v = in.f64("values");
  m.metric = metric_from_tag(in.u16("metric tag"));
  const std::uint16_t policy = in.u16("policy tag");
  if (policy > 1) throw FormatError("'" + path + "': unknown alignment policy tag", in.offset() - 2);
  m.policy = static_cast<AlignmentPolicy>(policy);
  m.config_hash = in.u32("config hash");
  if (!in.at_end()) throw FormatError("'" + path + "': trailing bytes", in.offset());
  return m;
}

}  // namespace percepta
