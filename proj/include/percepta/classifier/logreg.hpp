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
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/dataset/genre.hpp"

namespace percepta {

using RowMajorXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMajorXd> as_eigen(const Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

/// Per-dimension standardization fitted on training rows only. Dimensions
/// with zero variance map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;  // 0 for constant dimensions

  static Standardizer fit(const Matrix& train) {
    if (train.rows() == 0) throw InputError("cannot fit a standardizer on zero rows");
    Standardizer s;
    const std::size_t d = train.cols();
    s.mean.assign(d, 0.0);
    s.inv_std.assign(d, 0.0);
    for (std::size_t r = 0; r < train.rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += train(r, c);
    for (double& m : s.mean) m /= static_cast<double>(train.rows());
    std::vector<double> var(d, 0.0);
    for (std::size_t r = 0; r < train.rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) var[c] += (train(r, c) - s.mean[c]) * (train(r, c) - s.mean[c]);
    for (std::size_t c = 0; c < d; ++c) {
      const double sd = std::sqrt(var[c] / static_cast<double>(train.rows()));
      s.inv_std[c] = sd > 1e-12 ? 1.0 / sd : 0.0;
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    if (x.cols() != mean.size()) throw InputError("standardizer dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) * inv_std[c];
    return out;
  }
};

struct LogRegConfig {
  double l2 = 1e-3;
  double step = 0.1;
  double tolerance = 1e-7;
  std::size_t max_iterations = 5000;
};

struct LogRegModel {
  std::vector<Label> classes;  // lexicographic
  RowMajorXd weights;          // classes x features
  Eigen::VectorXd bias;        // classes
  std::size_t iterations = 0;
  double objective = 0.0;

  std::size_t features() const { return static_cast<std::size_t>(weights.cols()); }
};

namespace detail {

inline Eigen::VectorXi encode_labels(const std::vector<Label>& labels, const std::vector<Label>& classes) {
  Eigen::VectorXi y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), labels[i]);
    if (it == classes.end() || *it != labels[i]) throw InputError("unknown label '" + labels[i] + "'");
    y(static_cast<Eigen::Index>(i)) = static_cast<int>(it - classes.begin());
  }
  return y;
}

/// Row-wise softmax of class scores, shifted by the row max.
inline RowMajorXd softmax_rows(const RowMajorXd& scores) {
  RowMajorXd p = scores;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    p.row(r).array() -= p.row(r).maxCoeff();
    p.row(r) = p.row(r).array().exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

}  // namespace detail

inline RowMajorXd logreg_scores(const LogRegModel& m, const Matrix& features) {
  if (features.cols() != m.features()) {
    throw InputError("feature dimension " + std::to_string(features.cols()) + " does not match model " +
                     std::to_string(m.features()));
  }
  RowMajorXd s = as_eigen(features) * m.weights.transpose();
  s.rowwise() += m.bias.transpose();
  return s;
}

/// Mean cross-entropy plus (l2 / 2) * ||W||^2. Bias is not penalized.
inline double logreg_objective(const LogRegModel& m, const Matrix& features, const std::vector<Label>& labels,
                               double l2) {
  const auto y = detail::encode_labels(labels, m.classes);
  const RowMajorXd s = logreg_scores(m, features);
  double ce = 0;
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    const double lse = mx + std::log((s.row(r).array() - mx).exp().sum());
    ce += lse - s(r, y(r));
  }
  return ce / static_cast<double>(s.rows()) + 0.5 * l2 * m.weights.squaredNorm();
}

struct LogRegGradient {
  RowMajorXd weights;
  Eigen::VectorXd bias;
};

inline LogRegGradient logreg_gradient(const LogRegModel& m, const Matrix& features, const std::vector<Label>& labels,
                                      double l2) {
  const auto y = detail::encode_labels(labels, m.classes);
  RowMajorXd p = detail::softmax_rows(logreg_scores(m, features));
  for (Eigen::Index r = 0; r < p.rows(); ++r) p(r, y(r)) -= 1.0;
  const double inv_n = 1.0 / static_cast<double>(p.rows());
  LogRegGradient g;
  g.weights = (p.transpose() * as_eigen(features)) * inv_n + l2 * m.weights;
  g.bias = p.colwise().sum().transpose() * inv_n;
  return g;
}

/// Full-batch gradient descent from zero weights. Stops when an accepted
/// step improves the objective by less than `tolerance`. A step that raises
/// the objective is rejected and the step size halved.
inline LogRegModel logreg_train(const Matrix& features, const std::vector<Label>& labels, const LogRegConfig& cfg = {}) {
  if (features.rows() != labels.size()) {
    throw InputError("feature rows (" + std::to_string(features.rows()) + ") != labels (" +
                     std::to_string(labels.size()) + ")");
  }
  if (!features.all_finite()) throw InputError("features contain non-finite values");
  const std::set<Label> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ConfigError("logistic regression needs at least 2 classes");
  if (cfg.l2 < 0) throw ConfigError("l2 must be non-negative");

  LogRegModel m;
  m.classes.assign(distinct.begin(), distinct.end());
  m.weights = RowMajorXd::Zero(static_cast<Eigen::Index>(m.classes.size()), static_cast<Eigen::Index>(features.cols()));
  m.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.classes.size()));

  double step = cfg.step;
  double current = logreg_objective(m, features, labels, cfg.l2);
  std::size_t it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const auto g = logreg_gradient(m, features, labels, cfg.l2);
    LogRegModel next = m;
    next.weights -= step * g.weights;
    next.bias -= step * g.bias;
    const double value = logreg_objective(next, features, labels, cfg.l2);
    if (!std::isfinite(value) || value > current) {
      step *= 0.5;
      if (step < 1e-12) break;
      continue;
    }
    const double improvement = current - value;
    m.weights = std::move(next.weights);
    m.bias = std::move(next.bias);
    current = value;
    if (improvement < cfg.tolerance) {
      ++it;
      break;
    }
  }
  m.iterations = it;
  m.objective = current;
  return m;
}

/// Argmax class per row; score ties go to the lexicographically first class.
inline std::vector<Label> logreg_predict(const LogRegModel& m, const Matrix& features) {
  const RowMajorXd s = logreg_scores(m, features);
  std::vector<Label> out(features.rows());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c)
      if (s(r, c) > s(r, best)) best = c;
    out[static_cast<std::size_t>(r)] = m.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

inline RowMajorXd logreg_probabilities(const LogRegModel& m, const Matrix& features) {
  return detail::softmax_rows(logreg_scores(m, features));
}

}  // namespace percepta
