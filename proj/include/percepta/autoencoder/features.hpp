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
#include <cstdint>
#include <vector>

#include "percepta/autoencoder/autoencoder.hpp"
#include "percepta/core/parallel.hpp"
#include "percepta/dataset/spectrogram.hpp"

namespace percepta {

/// Integer codes in {0, ..., levels - 1}, laid out like the latent activation.
struct LatentCode {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint32_t> values;
};

inline void check_range(const LatentRange& r, std::size_t levels) {
  if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw ConfigError("degenerate latent range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
  }
  if (levels < 2) throw ConfigError("quant_levels must be >= 2");
}

/// Affine map [lo, hi] -> [0, levels - 1], round half up, clamp.
inline std::uint32_t quantize_value(double v, const LatentRange& r, std::size_t levels) {
  const double top = static_cast<double>(levels - 1);
  const double q = std::floor((v - r.lo) / (r.hi - r.lo) * top + 0.5);
  return static_cast<std::uint32_t>(std::clamp(q, 0.0, top));
}

inline double dequantize_value(std::uint32_t code, const LatentRange& r, std::size_t levels) {
  return r.lo + (r.hi - r.lo) * static_cast<double>(code) / static_cast<double>(levels - 1);
}

inline LatentCode quantize_latent(const nn::Activation& latent, const LatentRange& range, std::size_t levels) {
  check_range(range, levels);
  LatentCode code{latent.channels, latent.height, latent.width, {}};
  code.values.resize(static_cast<std::size_t>(latent.data.size()));
  for (std::size_t c = 0; c < latent.channels; ++c)
    for (std::size_t i = 0; i < latent.height * latent.width; ++i)
      code.values[c * latent.height * latent.width + i] =
          quantize_value(latent.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)), range, levels);
  return code;
}

inline nn::Activation dequantize_latent(const LatentCode& code, const LatentRange& range, std::size_t levels) {
  check_range(range, levels);
  nn::Activation a(code.channels, code.height, code.width);
  for (std::size_t c = 0; c < code.channels; ++c)
    for (std::size_t i = 0; i < code.height * code.width; ++i)
      a.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) =
          dequantize_value(code.values[c * code.height * code.width + i], range, levels);
  return a;
}

/// Tiles the spectrogram into non-overlapping patches (zero-padded at the
/// right and bottom edges), encodes and quantizes each, and averages the
/// codes rescaled to [0, 1]. Length = latent_channels * side * side.
inline std::vector<double> extract_features(const AEParams& p, const Spectrogram& spec, std::size_t threads = 1) {
  const auto& c = p.config;
  const std::size_t ps = c.patch_size;
  if (spec.bands() < ps) {
    throw InputError("spectrogram '" + spec.id + "' has " + std::to_string(spec.bands()) +
                     " mel bands, fewer than one patch (" + std::to_string(ps) + ")");
  }
  if (spec.frames() == 0) throw InputError("spectrogram '" + spec.id + "' has no frames");
  check_range(p.latent_range, c.quant_levels);
  const std::size_t tr = (spec.bands() + ps - 1) / ps;
  const std::size_t tc = (spec.frames() + ps - 1) / ps;
  std::vector<LatentCode> codes(tr * tc);
  parallel_for(codes.size(), threads, [&](std::size_t t) {
    const std::size_t r0 = (t / tc) * ps, c0 = (t % tc) * ps;
    Matrix patch(ps, ps);
    for (std::size_t r = 0; r < ps && r0 + r < spec.bands(); ++r)
      for (std::size_t k = 0; k < ps && c0 + k < spec.frames(); ++k) patch(r, k) = spec.data(r0 + r, c0 + k);
    codes[t] = quantize_latent(ae_encode(p, patch), p.latent_range, c.quant_levels);
  });
  std::vector<double> feature(c.latent_size(), 0.0);
  for (const auto& code : codes)
    for (std::size_t i = 0; i < feature.size(); ++i) feature[i] += static_cast<double>(code.values[i]);
  const double scale = 1.0 / (static_cast<double>(c.quant_levels - 1) * static_cast<double>(codes.size()));
  for (double& v : feature) v *= scale;
  return feature;
}

}  // namespace percepta
