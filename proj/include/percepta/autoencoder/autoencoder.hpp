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
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percepta/autoencoder/conv.hpp"
#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/core/parallel.hpp"
#include "percepta/core/rng.hpp"
#include "percepta/metrics/metric.hpp"

namespace percepta {

struct AEConfig {
  std::size_t patch_size = 64;
  std::vector<std::size_t> channel_widths{8, 16, 32};
  std::size_t kernel_size = 4;  // encoder downsampling kernels; decoder uses 3x3
  std::size_t latent_channels = 32;
  std::size_t quant_levels = 32;
  MetricKind loss = MetricKind::kMse;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double leaky_slope = 0.2;
  std::size_t steps = 2000;
  std::size_t batch = 16;
  std::uint64_t seed = 0;
  bool zero_patches = false;  // debug hook: train on all-zero patches instead of noise
  MetricConfig metrics;

  std::size_t levels() const { return channel_widths.size(); }
  std::size_t latent_side() const { return patch_size >> levels(); }
  std::size_t latent_size() const { return latent_channels * latent_side() * latent_side(); }

  void validate() const {
    if (channel_widths.empty()) throw ConfigError("channel_widths must not be empty");
    for (std::size_t w : channel_widths)
      if (w == 0) throw ConfigError("channel widths must be positive");
    if (levels() >= 16 || patch_size == 0 || patch_size % (std::size_t{1} << levels()) != 0) {
      throw ConfigError("patch_size " + std::to_string(patch_size) + " is not divisible by 2^" +
                        std::to_string(levels()));
    }
    if (kernel_size < 2 || kernel_size % 2 != 0) throw ConfigError("kernel_size must be even and >= 2");
    if (latent_channels == 0) throw ConfigError("latent_channels must be positive");
    if (quant_levels < 2) throw ConfigError("quant_levels must be >= 2");
    if (!(step_size > 0)) throw ConfigError("step_size must be positive");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw ConfigError("moment decays must be in [0,1)");
    if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
    if (steps == 0) throw ConfigError("steps must be positive");
    if (batch == 0) throw ConfigError("batch must be positive");
    metrics.validate();
    if (loss == MetricKind::kOneMinusMsSsim && metrics.ssim.window_size > patch_size) {
      throw ConfigError("ssim window " + std::to_string(metrics.ssim.window_size) + " exceeds patch size");
    }
  }

  /// Human-readable layer listing for config echoes.
  std::string architecture() const {
    std::string s = "enc";
    std::size_t side = patch_size, ch = 1;
    for (std::size_t w : channel_widths) {
      s += " conv" + std::to_string(kernel_size) + "s2(" + std::to_string(ch) + "->" + std::to_string(w) + ")+lrelu";
      ch = w;
      side /= 2;
    }
    s += " conv3(" + std::to_string(ch) + "->" + std::to_string(latent_channels) + ") latent " +
         std::to_string(latent_channels) + "x" + std::to_string(side) + "x" + std::to_string(side) + "; dec";
    s += " conv3(" + std::to_string(latent_channels) + "->" + std::to_string(channel_widths.back()) + ")+lrelu";
    for (std::size_t j = 0; j < levels(); ++j) {
      const std::size_t in = channel_widths[levels() - 1 - j];
      const std::size_t out = j + 1 == levels() ? 1 : channel_widths[levels() - 2 - j];
      s += " up2+conv3(" + std::to_string(in) + "->" + std::to_string(out) + ")" +
           (j + 1 == levels() ? "+sigmoid" : "+lrelu");
    }
    return s;
  }
};

inline nlohmann::json to_json(const AEConfig& c) {
  return {{"patch_size", c.patch_size},
          {"channel_widths", c.channel_widths},
          {"kernel_size", c.kernel_size},
          {"latent_channels", c.latent_channels},
          {"quant_levels", c.quant_levels},
          {"loss", std::string(metric_token(c.loss))},
          {"step_size", c.step_size},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"leaky_slope", c.leaky_slope},
          {"steps", c.steps},
          {"batch", c.batch},
          {"seed", c.seed},
          {"zero_patches", c.zero_patches},
          {"noise", "iid uniform [0,1]"},
          {"architecture", c.architecture()},
          {"metrics", to_json(c.metrics)}};
}

/// Absent keys keep their defaults.
inline AEConfig ae_config_from_json(const nlohmann::json& j) {
  AEConfig c;
  try {
    c.patch_size = j.value("patch_size", c.patch_size);
    c.channel_widths = j.value("channel_widths", c.channel_widths);
    c.kernel_size = j.value("kernel_size", c.kernel_size);
    c.latent_channels = j.value("latent_channels", c.latent_channels);
    c.quant_levels = j.value("quant_levels", c.quant_levels);
    if (j.contains("loss")) c.loss = parse_metric(j.at("loss").get<std::string>());
    c.step_size = j.value("step_size", c.step_size);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
    c.steps = j.value("steps", c.steps);
    c.batch = j.value("batch", c.batch);
    c.seed = j.value("seed", c.seed);
    c.zero_patches = j.value("zero_patches", c.zero_patches);
    if (j.contains("metrics")) c.metrics = metric_config_from_json(j.at("metrics"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("autoencoder config: ") + e.what());
  }
  return c;
}

struct LatentRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  bool valid() const { return hi > lo; }
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void merge(const LatentRange& o) {
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

struct AEParams {
  AEConfig config;
  std::vector<nn::Conv2d> layers;  // encoder, latent conv, decoder input conv, decoder
  std::vector<nn::ConvGrad> m;     // first-moment accumulators
  std::vector<nn::ConvGrad> v;     // second-moment accumulators
  std::uint64_t adam_step = 0;
  LatentRange latent_range;

  std::size_t latent_layer() const { return config.levels(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }
};

namespace detail {

enum class Act { kLeaky, kLinear, kSigmoid };

struct LayerRole {
  bool upsample_input;
  Act act;
};

inline std::vector<LayerRole> layer_roles(const AEConfig& c) {
  std::vector<LayerRole> roles;
  for (std::size_t i = 0; i < c.levels(); ++i) roles.push_back({false, Act::kLeaky});
  roles.push_back({false, Act::kLinear});  // latent
  roles.push_back({false, Act::kLeaky});   // decoder input
  for (std::size_t j = 0; j < c.levels(); ++j)
    roles.push_back({true, j + 1 == c.levels() ? Act::kSigmoid : Act::kLeaky});
  return roles;
}

inline std::vector<nn::Conv2d> build_layers(const AEConfig& c) {
  std::vector<nn::Conv2d> layers;
  std::size_t ch = 1;
  for (std::size_t w : c.channel_widths) {
    layers.emplace_back(ch, w, c.kernel_size, 2, (c.kernel_size - 2) / 2);
    ch = w;
  }
  layers.emplace_back(ch, c.latent_channels, 3, 1, 1);
  layers.emplace_back(c.latent_channels, c.channel_widths.back(), 3, 1, 1);
  for (std::size_t j = 0; j < c.levels(); ++j) {
    const std::size_t in = c.channel_widths[c.levels() - 1 - j];
    const std::size_t out = j + 1 == c.levels() ? 1 : c.channel_widths[c.levels() - 2 - j];
    layers.emplace_back(in, out, 3, 1, 1);
  }
  return layers;
}

inline std::vector<nn::ConvGrad> zero_grads(const std::vector<nn::Conv2d>& layers) {
  std::vector<nn::ConvGrad> g;
  for (const auto& l : layers)
    g.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

inline void apply_act(nn::RowMat& z, Act act, double slope) {
  switch (act) {
    case Act::kLeaky: z = z.unaryExpr([slope](double v) { return v > 0 ? v : slope * v; }); break;
    case Act::kLinear: break;
    case Act::kSigmoid: z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }); break;
  }
}

struct Trace {
  std::vector<nn::Activation> inputs;  // conv inputs (after any upsampling)
  std::vector<nn::RowMat> cols;
  std::vector<nn::Activation> outputs;  // post-activation
};

inline nn::Activation patch_activation(const Matrix& patch) {
  nn::Activation a(1, patch.rows(), patch.cols());
  for (std::size_t i = 0; i < patch.size(); ++i) a.data(0, static_cast<Eigen::Index>(i)) = patch.values()[i];
  return a;
}

inline void check_patch(const AEParams& p, const Matrix& patch) {
  if (patch.rows() != p.config.patch_size || patch.cols() != p.config.patch_size) {
    throw InputError("patch must be " + std::to_string(p.config.patch_size) + "x" +
                     std::to_string(p.config.patch_size) + ", got " + patch.shape_string());
  }
}

/// Runs layers [0, last] keeping everything the backward pass needs.
inline Trace run(const AEParams& p, const Matrix& patch, std::size_t last) {
  const auto roles = layer_roles(p.config);
  Trace t;
  nn::Activation x = patch_activation(patch);
  for (std::size_t l = 0; l <= last; ++l) {
    if (roles[l].upsample_input) x = nn::upsample2(x);
    nn::RowMat cols = p.layers[l].im2col(x);
    nn::Activation y = p.layers[l].forward(x, cols);
    apply_act(y.data, roles[l].act, p.config.leaky_slope);
    t.inputs.push_back(std::move(x));
    t.cols.push_back(std::move(cols));
    x = y;
    t.outputs.push_back(std::move(y));
  }
  return t;
}

inline Matrix to_matrix(const nn::Activation& a) {
  Matrix m(a.height, a.width);
  for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = a.data(0, static_cast<Eigen::Index>(i));
  return m;
}

/// Gradients of all parameters given d loss / d reconstruction.
inline std::vector<nn::ConvGrad> backward(const AEParams& p, const Trace& t, const Matrix& d_recon) {
  const auto roles = layer_roles(p.config);
  auto grads = zero_grads(p.layers);
  nn::RowMat d_out(1, static_cast<Eigen::Index>(d_recon.size()));
  for (std::size_t i = 0; i < d_recon.size(); ++i) d_out(0, static_cast<Eigen::Index>(i)) = d_recon.values()[i];
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const auto& y = t.outputs[l].data;
    nn::RowMat dz;
    switch (roles[l].act) {
      case Act::kLeaky: {
        const double slope = p.config.leaky_slope;
        dz = d_out.binaryExpr(y, [slope](double g, double v) { return v > 0 ? g : slope * g; });
        break;
      }
      case Act::kLinear: dz = d_out; break;
      case Act::kSigmoid: dz = d_out.array() * y.array() * (1.0 - y.array()); break;
    }
    grads[l].weight.noalias() = dz * t.cols[l].transpose();
    grads[l].bias = dz.rowwise().sum();
    if (l == 0) break;
    const nn::RowMat dcols = p.layers[l].weight.transpose() * dz;
    nn::Activation dx = p.layers[l].col2im(dcols, t.inputs[l].height, t.inputs[l].width);
    if (roles[l].upsample_input) dx = nn::upsample2_adjoint(dx);
    d_out = std::move(dx.data);
  }
  return grads;
}

}  // namespace detail

/// Kernels uniform in +-sqrt(6 / fan_in), zero biases, zero moments.
inline AEParams ae_init(const AEConfig& config) {
  config.validate();
  AEParams p;
  p.config = config;
  p.layers = detail::build_layers(config);
  Rng rng(derive_seed(config.seed, "autoencoder/init"));
  for (auto& l : p.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(l.fan_in()));
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = rng.uniform(-bound, bound);
  }
  p.m = detail::zero_grads(p.layers);
  p.v = detail::zero_grads(p.layers);
  return p;
}

struct AEOutput {
  Matrix reconstruction;
  nn::Activation latent;
};

inline AEOutput ae_forward(const AEParams& p, const Matrix& patch) {
  detail::check_patch(p, patch);
  auto t = detail::run(p, patch, p.layers.size() - 1);
  return {detail::to_matrix(t.outputs.back()), t.outputs[p.latent_layer()]};
}

/// Encoder half only.
inline nn::Activation ae_encode(const AEParams& p, const Matrix& patch) {
  detail::check_patch(p, patch);
  auto t = detail::run(p, patch, p.latent_layer());
  return std::move(t.outputs.back());
}

struct BatchResult {
  double loss = 0.0;  // mean over the batch
  std::vector<nn::ConvGrad> grads;
  LatentRange latent;
};

/// Mean batch loss and its parameter gradient. Samples may run in parallel;
/// per-sample gradients are summed in sample order.
inline BatchResult ae_batch_gradient(const AEParams& p, const std::vector<Matrix>& patches, std::size_t threads = 1) {
  if (patches.empty()) throw InputError("empty batch");
  for (const auto& x : patches) detail::check_patch(p, x);
  const double inv_b = 1.0 / static_cast<double>(patches.size());
  struct Slot {
    double loss = 0;
    std::vector<nn::ConvGrad> grads;
    LatentRange latent;
  };
  std::vector<Slot> slots(patches.size());
  parallel_for(patches.size(), threads, [&](std::size_t i) {
    const auto t = detail::run(p, patches[i], p.layers.size() - 1);
    const Matrix recon = detail::to_matrix(t.outputs.back());
    slots[i].loss = distance(p.config.loss, patches[i], recon, p.config.metrics);
    const Matrix d = metric_gradient(p.config.loss, patches[i], recon, p.config.metrics) * inv_b;
    slots[i].grads = detail::backward(p, t, d);
    const auto& z = t.outputs[p.latent_layer()].data;
    for (Eigen::Index k = 0; k < z.size(); ++k) slots[i].latent.include(z.data()[k]);
  });
  BatchResult out;
  out.grads = detail::zero_grads(p.layers);
  for (const auto& s : slots) {
    out.loss += s.loss;
    for (std::size_t l = 0; l < out.grads.size(); ++l) {
      out.grads[l].weight += s.grads[l].weight;
      out.grads[l].bias += s.grads[l].bias;
    }
    out.latent.merge(s.latent);
  }
  out.loss *= inv_b;
  return out;
}

inline void adam_update(AEParams& p, const std::vector<nn::ConvGrad>& g) {
  const auto& c = p.config;
  ++p.adam_step;
  const double t = static_cast<double>(p.adam_step);
  const double c1 = 1.0 - std::pow(c.beta1, t);
  const double c2 = 1.0 - std::pow(c.beta2, t);
  auto step = [&](auto& w, auto& m, auto& v, const auto& grad) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseAbs2();
    w.array() -= c.step_size * (m.array() / c1) / ((v.array() / c2).sqrt() + c.epsilon);
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    step(p.layers[l].weight, p.m[l].weight, p.v[l].weight, g[l].weight);
    step(p.layers[l].bias, p.m[l].bias, p.v[l].bias, g[l].bias);
  }
}

struct AETrainResult {
  AEParams params;
  std::vector<double> loss_curve;
};

/// Called after each step with (step index, batch loss).
using TrainProgress = std::function<void(std::size_t, double)>;

inline AETrainResult ae_train(const AEConfig& config, std::size_t threads = 1, const TrainProgress& progress = {}) {
  AETrainResult r{ae_init(config), {}};
  AEParams& p = r.params;
  Rng noise(derive_seed(config.seed, "autoencoder/noise"));
  const std::size_t tail = std::max<std::size_t>(1, (config.steps + 9) / 10);
  const std::size_t tail_start = config.steps - std::min(tail, config.steps);
  r.loss_curve.reserve(config.steps);
  std::vector<Matrix> batch(config.batch, Matrix(config.patch_size, config.patch_size));
  for (std::size_t step = 0; step < config.steps; ++step) {
    for (auto& x : batch)
      for (double& v : x.values()) v = config.zero_patches ? 0.0 : noise.uniform();
    BatchResult b = ae_batch_gradient(p, batch, threads);
    bool finite = std::isfinite(b.loss);
    for (const auto& g : b.grads) finite = finite && g.weight.allFinite() && g.bias.allFinite();
    if (!finite) throw TrainingError("non-finite loss or gradient", static_cast<std::int64_t>(step));
    r.loss_curve.push_back(b.loss);
    if (step >= tail_start) p.latent_range.merge(b.latent);
    adam_update(p, b.grads);
    if (progress) progress(step, b.loss);
  }
  return r;
}

}  // namespace percepta
