/*
 * Copyright 2026 The overheat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <span>
#include <vector>

#include "overheat/classifiers/weights.hpp"
#include "overheat/features.hpp"
#include "overheat/types.hpp"

namespace overheat {

// Weighted, L2-regularized logistic loss
//
//   L(beta, b) = 1/2 |beta|^2 + C * sum_i w_i * log(1 + exp(-t_i (beta.x_i + b)))
//
// with t_i in {-1, +1} (+1 = anomalous). The intercept b is not penalized.
// Parameters are packed as [beta_0 .. beta_{d-1}, b].
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& X, std::span<const ClassLabel> y,
                    const ClassWeights& weights, double C)
      : X_(X) {
    targets_.reserve(y.size());
    scaled_weights_.reserve(y.size());
    for (auto c : y) {
      targets_.push_back(c == ClassLabel::Anomalous ? 1.0 : -1.0);
      scaled_weights_.push_back(C * weights[c]);
    }
  }

  std::size_t dimension() const noexcept { return X_.cols() + 1; }

  // Returns the loss and writes its gradient into `grad`.
  double evaluate(std::span<const double> params, std::span<double> grad) const {
    const std::size_t d = X_.cols();
    double loss = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      loss += 0.5 * params[j] * params[j];
      grad[j] = params[j];
    }
    grad[d] = 0.0;
    for (std::size_t i = 0; i < X_.rows(); ++i) {
      const auto x = X_.row(i);
      double z = params[d];
      for (std::size_t j = 0; j < d; ++j) z += params[j] * x[j];
      const double m = targets_[i] * z;
      // log(1 + exp(-m)) and d/dm of it, both without overflow.
      const double softplus = m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
      const double sigma_neg = m > 0 ? std::exp(-m) / (1.0 + std::exp(-m))
                                     : 1.0 / (1.0 + std::exp(m));
      loss += scaled_weights_[i] * softplus;
      const double coef = -scaled_weights_[i] * targets_[i] * sigma_neg;
      for (std::size_t j = 0; j < d; ++j) grad[j] += coef * x[j];
      grad[d] += coef;
    }
    return loss;
  }

  double value(std::span<const double> params) const {
    std::vector<double> g(dimension());
    return evaluate(params, g);
  }

 private:
  const Matrix& X_;
  std::vector<double> targets_;
  std::vector<double> scaled_weights_;
};

struct LogisticModel {
  Standardizer standardizer;
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::size_t iterations = 0;
  bool converged = false;

  double decision(std::span<const double> raw_row) const {
    std::vector<double> x(raw_row.size());
    standardizer.transform_row(raw_row, x);
    double z = intercept;
    for (std::size_t j = 0; j < x.size(); ++j) z += coefficients[j] * x[j];
    return z;
  }

  // P(anomalous) >= 0.5 exactly when the linear score is >= 0.
  ClassLabel predict_row(std::span<const double> raw_row) const {
    return decision(raw_row) >= 0.0 ? ClassLabel::Anomalous : ClassLabel::Nominal;
  }
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

struct MinimizeResult {
  std::vector<double> params;
  std::size_t iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking. Deterministic: no randomness
// and a fixed evaluation order.
inline MinimizeResult minimize_lbfgs(const LogisticObjective& f,
                                     std::vector<double> x0,
                                     std::size_t max_iterations, double tolerance) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  const std::size_t n = x0.size();

  MinimizeResult res;
  res.params = std::move(x0);
  std::vector<double> g(n), g_new(n), x_new(n), dir(n);
  double fx = f.evaluate(res.params, g);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    if (detail::inf_norm(g) <= tolerance) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    for (std::size_t k = 0; k < n; ++k) dir[k] = -g[k];
    std::vector<double> alpha(history.size());
    for (std::size_t h = history.size(); h-- > 0;) {
      alpha[h] = history[h].rho * detail::dot(history[h].s, dir);
      for (std::size_t k = 0; k < n; ++k) dir[k] -= alpha[h] * history[h].y[k];
    }
    if (!history.empty()) {
      const auto& last = history.back();
      const double gamma = detail::dot(last.s, last.y) / detail::dot(last.y, last.y);
      for (auto& v : dir) v *= gamma;
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const double beta = history[h].rho * detail::dot(history[h].y, dir);
      for (std::size_t k = 0; k < n; ++k) dir[k] += (alpha[h] - beta) * history[h].s[k];
    }

    double slope = detail::dot(g, dir);
    if (!(slope < 0.0)) {
      history.clear();
      for (std::size_t k = 0; k < n; ++k) dir[k] = -g[k];
      slope = detail::dot(g, dir);
    }

    double step = history.empty() ? std::min(1.0, 1.0 / detail::inf_norm(g)) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int trial = 0; trial < 60; ++trial) {
      for (std::size_t k = 0; k < n; ++k) x_new[k] = res.params[k] + step * dir[k];
      f_new = f.evaluate(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further decrease representable

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      p.s[k] = x_new[k] - res.params[k];
      p.y[k] = g_new[k] - g[k];
    }
    const double sy = detail::dot(p.s, p.y);
    if (sy > 1e-12 * detail::dot(p.y, p.y)) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (history.size() > kMemory) history.pop_front();
    }
    res.params.swap(x_new);
    g.swap(g_new);
    fx = f_new;
  }
  if (!res.converged && detail::inf_norm(g) <= tolerance) res.converged = true;
  return res;
}

// Expects raw features; the standardizer is fitted here on the training rows
// and stored with the model.
inline LogisticModel train_logistic(const Matrix& X, std::span<const ClassLabel> y,
                                    const ClassWeights& weights,
                                    const LogisticConfig& cfg) {
  check_training_data(X, y);
  require_both_classes(y, "logistic regression");
  LogisticModel model;
  model.standardizer = fit_standardizer(X);
  const Matrix Z = standardize(X, model.standardizer);
  const LogisticObjective objective(Z, y, weights, cfg.C);
  auto res = minimize_lbfgs(objective, std::vector<double>(objective.dimension(), 0.0),
                            cfg.max_iterations, cfg.tolerance);
  model.intercept = res.params.back();
  res.params.pop_back();
  model.coefficients = std::move(res.params);
  model.iterations = res.iterations;
  model.converged = res.converged;
  return model;
}

}  // namespace overheat
