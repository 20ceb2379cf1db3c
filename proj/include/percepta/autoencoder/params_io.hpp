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

#include <string>
#include <string_view>

#include "percepta/autoencoder/autoencoder.hpp"
#include "percepta/core/binary_io.hpp"
#include "percepta/core/hash.hpp"

// AEP1 layout (little endian):
//   "AEP1", u32 config hash, str16 config JSON, f64 latent lo, f64 latent hi,
//   u32 adam step low, u32 adam step high, u32 layer count, then per layer
//   weight, bias and their two moment tensors, each as
//   u32 rows, u32 cols, f32 values row-major.

namespace percepta {

inline constexpr std::string_view kParamsMagic = "AEP1";

/// Hash of the canonical config echo.
inline std::uint32_t ae_config_hash(const AEConfig& c) { return fnv1a32(to_json(c).dump()); }

namespace detail {

inline void write_tensor(io::ByteWriter& w, const Eigen::MatrixXd& t) {
  w.u32(static_cast<std::uint32_t>(t.rows()));
  w.u32(static_cast<std::uint32_t>(t.cols()));
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) w.f32(static_cast<float>(t(r, c)));
}

inline Eigen::MatrixXd read_tensor(io::ByteReader& in, Eigen::Index rows, Eigen::Index cols, const char* what) {
  const auto offset = in.offset();
  const std::uint32_t r = in.u32(what), c = in.u32(what);
  if (r != rows || c != cols) {
    throw FormatError(std::string(what) + " has shape " + std::to_string(r) + "x" + std::to_string(c) +
                          ", expected " + std::to_string(rows) + "x" + std::to_string(cols),
                      offset);
  }
  in.need(std::uint64_t{r} * c * 4, what);
  Eigen::MatrixXd t(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const float v = in.f32(what);
      if (!std::isfinite(v)) throw FormatError(std::string("non-finite value in ") + what, in.offset() - 4);
      t(i, j) = v;
    }
  return t;
}

}  // namespace detail

inline io::ByteWriter encode_params(const AEParams& p) {
  io::ByteWriter w;
  w.bytes(kParamsMagic);
  w.u32(ae_config_hash(p.config));
  w.str16(to_json(p.config).dump());
  w.f64(p.latent_range.lo);
  w.f64(p.latent_range.hi);
  w.u32(static_cast<std::uint32_t>(p.adam_step & 0xffffffffu));
  w.u32(static_cast<std::uint32_t>(p.adam_step >> 32));
  w.u32(static_cast<std::uint32_t>(p.layers.size()));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    detail::write_tensor(w, p.layers[l].weight);
    detail::write_tensor(w, p.layers[l].bias);
    detail::write_tensor(w, p.m[l].weight);
    detail::write_tensor(w, p.m[l].bias);
    detail::write_tensor(w, p.v[l].weight);
    detail::write_tensor(w, p.v[l].bias);
  }
  return w;
}

inline void save_params(const AEParams& p, const std::string& path) {
  encode_params(p).write_file(path);
}

inline AEParams decode_params(io::ByteReader in, const std::string& path) {
  if (in.bytes(4, "magic") != kParamsMagic) throw FormatError("'" + path + "' is not an AEP1 file", 0);
  const std::uint32_t hash = in.u32("config hash");
  const auto json_offset = in.offset();
  const std::string text = in.str16("config");
  AEConfig cfg;
  try {
    cfg = ae_config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': bad config echo: " + e.what(), json_offset);
  }
  cfg.validate();
  if (ae_config_hash(cfg) != hash) throw FormatError("'" + path + "': config hash does not match echo", json_offset);
  AEParams p;
  p.config = cfg;
  p.layers = detail::build_layers(cfg);
  p.latent_range.lo = in.f64("latent lo");
  p.latent_range.hi = in.f64("latent hi");
  const std::uint64_t lo = in.u32("adam step"), hi = in.u32("adam step");
  p.adam_step = lo | (hi << 32);
  const auto count_offset = in.offset();
  if (in.u32("layer count") != p.layers.size()) {
    throw FormatError("'" + path + "': layer count does not match architecture", count_offset);
  }
  p.m = detail::zero_grads(p.layers);
  p.v = detail::zero_grads(p.layers);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    L.weight = detail::read_tensor(in, L.weight.rows(), L.weight.cols(), "weight");
    L.bias = detail::read_tensor(in, L.bias.size(), 1, "bias");
    p.m[l].weight = detail::read_tensor(in, L.weight.rows(), L.weight.cols(), "weight moment");
    p.m[l].bias = detail::read_tensor(in, L.bias.size(), 1, "bias moment");
    p.v[l].weight = detail::read_tensor(in, L.weight.rows(), L.weight.cols(), "weight moment");
    p.v[l].bias = detail::read_tensor(in, L.bias.size(), 1, "bias moment");
  }
  if (!in.at_end()) throw FormatError("'" + path + "': trailing bytes", in.offset());
  return p;
}

inline AEParams load_params(const std::string& path) { return decode_params(io::ByteReader::from_file(path), path); }

/// Params as they read back from disk (tensors rounded to float).
inline AEParams stored_precision(const AEParams& p) { return decode_params(io::ByteReader(encode_params(p).buffer()), "<memory>"); }

}  // namespace percepta
