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

#include <Eigen/Dense>

#include "percepta/core/error.hpp"

namespace percepta::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Feature maps stored as channels x (height * width), pixel index y * width + x.
struct Activation {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  RowMat data;

  Activation() = default;
  Activation(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w),
        data(RowMat::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(h * w))) {}

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(y * width + x));
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(y * width + x));
  }
};

/// Zero-padded 2-D convolution (cross-correlation). Weights are stored as
/// out_channels x (in_channels * k * k), column index (ci * k + ky) * k + kx.
struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t pad = 0;
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t k, std::size_t s, std::size_t p)
      : in_channels(in), out_channels(out), kernel(k), stride(s), pad(p),
        weight(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in * k * k))),
        bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))) {}

  std::size_t fan_in() const { return in_channels * kernel * kernel; }

  std::size_t out_size(std::size_t n) const {
    if (n + 2 * pad < kernel) throw InputError("convolution input smaller than kernel");
    return (n + 2 * pad - kernel) / stride + 1;
  }

  /// Unfolds receptive fields into columns, one column per output pixel.
  RowMat im2col(const Activation& x) const {
    const std::size_t oh = out_size(x.height), ow = out_size(x.width);
    RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(fan_in()),
                                                 static_cast<Eigen::Index>(oh * ow));
    for (std::size_t ci = 0; ci < in_channels; ++ci)
      for (std::size_t ky = 0; ky < kernel; ++ky)
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const auto row = static_cast<Eigen::Index>((ci * kernel + ky) * kernel + kx);
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.height)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(x.width)) continue;
              cols(row, static_cast<Eigen::Index>(oy * ow + ox)) =
                  x.at(ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
    return cols;
  }

  /// Adjoint of im2col: scatters column gradients back onto the input grid.
  Activation col2im(const RowMat& cols, std::size_t h, std::size_t w) const {
    const std::size_t oh = out_size(h), ow = out_size(w);
    Activation dx(in_channels, h, w);
    for (std::size_t ci = 0; ci < in_channels; ++ci)
      for (std::size_t ky = 0; ky < kernel; ++ky)
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const auto row = static_cast<Eigen::Index>((ci * kernel + ky) * kernel + kx);
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              dx.at(ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) +=
                  cols(row, static_cast<Eigen::Index>(oy * ow + ox));
            }
          }
        }
    return dx;
  }

  Activation forward(const Activation& x, const RowMat& cols) const {
    Activation y(out_channels, out_size(x.height), out_size(x.width));
    y.data.noalias() = weight * cols;
    y.data.colwise() += bias;
    return y;
  }
};

struct ConvGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

/// Nearest-neighbour x2 upsampling and its adjoint (2x2 block sums).
inline Activation upsample2(const Activation& x) {
  Activation y(x.channels, x.height * 2, x.width * 2);
  for (std::size_t c = 0; c < x.channels; ++c)
    for (std::size_t yy = 0; yy < y.height; ++yy)
      for (std::size_t xx = 0; xx < y.width; ++xx) y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
  return y;
}

inline Activation upsample2_adjoint(const Activation& dy) {
  Activation dx(dy.channels, dy.height / 2, dy.width / 2);
  for (std::size_t c = 0; c < dy.channels; ++c)
    for (std::size_t yy = 0; yy < dy.height; ++yy)
      for (std::size_t xx = 0; xx < dy.width; ++xx) dx.at(c, yy / 2, xx / 2) += dy.at(c, yy, xx);
  return dx;
}

}  // namespace percepta::nn
