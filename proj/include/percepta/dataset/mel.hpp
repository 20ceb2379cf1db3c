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
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"

namespace percepta {

/// Settings for computing mel spectrograms from audio.
struct MelParams {
  double sample_rate = 22050.0;
  std::size_t n_fft = 2048;
  std::size_t hop = 512;
  std::size_t n_mels = 128;
  double eps_log = 1e-10;
  double f_min = 0.0;
  double f_max = 0.0;  // 0 means Nyquist

  double upper() const { return f_max > 0.0 ? f_max : sample_rate / 2.0; }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Center frequency of each band (n_mels entries), in Hz.
inline std::vector<double> mel_band_centers(const MelParams& p) {
  const double lo = hz_to_mel(p.f_min);
  const double hi = hz_to_mel(p.upper());
  std::vector<double> centers(p.n_mels);
  for (std::size_t m = 0; m < p.n_mels; ++m) {
    centers[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m + 1) / static_cast<double>(p.n_mels + 1));
  }
  return centers;
}

/// Triangular filters (n_mels x n_fft/2+1), peak 1 at each band center.
inline Matrix mel_filterbank(const MelParams& p) {
  const std::size_t bins = p.n_fft / 2 + 1;
  const double lo = hz_to_mel(p.f_min);
  const double hi = hz_to_mel(p.upper());
  std::vector<double> edges(p.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(p.n_mels + 1));
  }
  Matrix fb(p.n_mels, bins);
  for (std::size_t m = 0; m < p.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * p.sample_rate / static_cast<double>(p.n_fft);
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

/// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

/// STFT magnitude -> mel filterbank -> log(1 + s / eps_log).
///
/// Frame t covers samples [t*hop, t*hop + n_fft), zero-padded past the end,
/// giving ceil(len / hop) frames.
inline Matrix compute_mel(std::span<const double> waveform, const MelParams& p = {}) {
  if (waveform.empty()) throw InputError("compute_mel: empty waveform");
  if (waveform.size() < p.n_fft) {
    throw InputError("compute_mel: waveform of " + std::to_string(waveform.size()) +
                     " samples is shorter than one FFT window (" + std::to_string(p.n_fft) + ")");
  }
  if (p.hop == 0 || p.n_mels == 0 || p.n_fft < 2) throw ConfigError("compute_mel: invalid parameters");
  const std::size_t frames = (waveform.size() + p.hop - 1) / p.hop;
  const std::size_t bins = p.n_fft / 2 + 1;
  const Matrix fb = mel_filterbank(p);
  const auto window = hann_window(p.n_fft);

  Eigen::FFT<double> fft;
  std::vector<double> frame(p.n_fft);
  std::vector<std::complex<double>> spectrum;
  std::vector<double> mag(bins);
  Matrix out(p.n_mels, frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * p.hop;
    for (std::size_t i = 0; i < p.n_fft; ++i) {
      const std::size_t s = start + i;
      frame[i] = s < waveform.size() ? waveform[s] * window[i] : 0.0;
    }
    fft.fwd(spectrum, frame);
    for (std::size_t k = 0; k < bins; ++k) mag[k] = std::abs(spectrum[k]);
    for (std::size_t m = 0; m < p.n_mels; ++m) {
      const auto w = fb.row(m);
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += w[k] * mag[k];
      out(m, t) = std::log1p(e / p.eps_log);
    }
  }
  return out;
}

}  // namespace percepta
