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

// Soft-margin kernel SVM trained in the dual:
//
//   max_a  sum_i a_i - 1/2 sum_ij a_i a_j t_i t_j K(x_i, x_j)
//   s.t.   0 <= a_i <= C * w_{y_i},   sum_i a_i t_i = 0
//
// solved by sequential minimal optimization with second-order working-set
// selection. The kernel is the RBF exp(-gamma |a - b|^2) with
// gamma = 1 / (d * var(X)) over the standardized training matrix.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "overheat/classifiers/weights.hpp"
#include "overheat/error.hpp"
#include "overheat/features.hpp"
#include "overheat/types.hpp"

namespace overheat {

inline double rbf_kernel(std::span<const double> a, std::span<const double> b,
                         double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

inline double scale_gamma(const Matrix& X) {
  const auto v = X.values();
  if (v.empty()) return 1.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(v.size());
  return var > 0.0 ? 1.0 / (static_cast<double>(X.cols()) * var) : 1.0;
}

struct DualSolution {
  std::vector<double> alpha;
  double rho = 0.0;        // decision(x) = sum_i a_i t_i K(x_i, x) - rho
  double objective = 0.0;  // dual objective at alpha (maximization form)
  double violation = 0.0;  // final maximal KKT violation
  std::size_t iterations = 0;
};

// `kernel` is the n x n Gram matrix, `targets` are +-1, `upper` the per-sample
// box bounds.
inline DualSolution solve_svm_dual(const Matrix& kernel, std::span<const double> targets,
                                   std::span<const double> upper, double tolerance,
                                   std::size_t max_iterations) {
  constexpr double kTau = 1e-12;
  const std::size_t n = targets.size();
  auto Q = [&](std::size_t i, std::size_t j) {
    return targets[i] * targets[j] * kernel(i, j);
  };

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  auto& a = sol.alpha;
  // Gradient of f(a) = 1/2 a'Qa - e'a.
  std::vector<double> G(n, -1.0);
  auto at_upper = [&](std::size_t t) { return a[t] >= upper[t]; };
  auto at_lower = [&](std::size_t t) { return a[t] <= 0.0; };

  bool optimal = false;
  for (sol.iterations = 0; sol.iterations < max_iterations; ++sol.iterations) {
    // Select i: maximal violating index in I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (targets[t] > 0) {
        if (!at_upper(t) && -G[t] >= gmax) {
          gmax = -G[t];
          i = t;
        }
      } else if (!at_lower(t) && G[t] >= gmax) {
        gmax = G[t];
        i = t;
      }
    }

    // Select j in I_low by maximal second-order decrease.
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      double quad;
      if (targets[t] > 0) {
        if (at_lower(t)) continue;
        gmax2 = std::max(gmax2, G[t]);
        if (i == n) continue;
        grad_diff = gmax + G[t];
        quad = kernel(i, i) + kernel(t, t) - 2.0 * targets[i] * Q(i, t);
      } else {
        if (at_upper(t)) continue;
        gmax2 = std::max(gmax2, -G[t]);
        if (i == n) continue;
        grad_diff = gmax - G[t];
        quad = kernel(i, i) + kernel(t, t) + 2.0 * targets[i] * Q(i, t);
      }
      if (grad_diff > 0) {
        const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }

    sol.violation = (i == n) ? 0.0 : gmax + gmax2;
    if (i == n || j == n || sol.violation < tolerance) {
      optimal = true;
      break;
    }

    const double ci = upper[i];
    const double cj = upper[j];
    const double old_ai = a[i];
    const double old_aj = a[j];
    if (targets[i] != targets[j]) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > ci - cj) {
        if (a[i] > ci) {
          a[i] = ci;
          a[j] = ci - diff;
        }
      } else if (a[j] > cj) {
        a[j] = cj;
        a[i] = cj + diff;
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > ci) {
        if (a[i] > ci) {
          a[i] = ci;
          a[j] = sum - ci;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > cj) {
        if (a[j] > cj) {
          a[j] = cj;
          a[i] = sum - cj;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }

    const double dai = a[i] - old_ai;
    const double daj = a[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) G[t] += Q(i, t) * dai + Q(j, t) * daj;
  }

  if (!optimal) {
    throw NumericalError("SVM solver did not converge within " +
                             std::to_string(max_iterations) +
                             " iterations (KKT violation " +
                             format_double(sol.violation) + ")",
                         sol.violation);
  }

  // Offset: average over free variables, else midpoint of the feasible band.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = targets[t] * G[t];
    if (at_upper(t)) {
      if (targets[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (targets[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  double f = 0.0;
  for (std::size_t t = 0; t < n; ++t) f += a[t] * (G[t] - 1.0);
  sol.objective = -0.5 * f;
  return sol;
}

struct SvmModel {
  Standardizer standardizer;
  Matrix support_vectors;            // standardized
  std::vector<double> dual_coef;     // a_i * t_i per support vector
  double intercept = 0.0;            // = -rho
  double gamma = 1.0;

  double decision(std::span<const double> raw_row) const {
    std::vector<double> x(raw_row.size());
    standardizer.transform_row(raw_row, x);
    double s = intercept;
    for (std::size_t k = 0; k < dual_coef.size(); ++k) {
      s += dual_coef[k] * rbf_kernel(support_vectors.row(k), x, gamma);
    }
    return s;
  }

  // A zero decision value maps to Anomalous.
  ClassLabel predict_row(std::span<const double> raw_row) const {
    return decision(raw_row) >= 0.0 ? ClassLabel::Anomalous : ClassLabel::Nominal;
  }
};

struct SvmTraining {
  SvmModel model;
  DualSolution dual;
  std::vector<double> upper;
  std::vector<double> targets;
};

// Full training record, including the dual solution, for callers that audit
// feasibility. Most code wants train_svc().
inline SvmTraining train_svc_detailed(const Matrix& X, std::span<const ClassLabel> y,
                                      const ClassWeights& weights, const SvmConfig& cfg) {
  check_training_data(X, y);
  require_both_classes(y, "support vector classifier");
  SvmTraining out;
  out.model.standardizer = fit_standardizer(X);
  const Matrix Z = standardize(X, out.model.standardizer);
  out.model.gamma = scale_gamma(Z);

  const std::size_t n = Z.rows();
  Matrix K(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      K(i, j) = K(j, i) = rbf_kernel(Z.row(i), Z.row(j), out.model.gamma);
    }
  }
  for (auto c : y) {
    out.targets.push_back(c == ClassLabel::Anomalous ? 1.0 : -1.0);
    out.upper.push_back(cfg.C * weights[c]);
  }
  out.dual = solve_svm_dual(K, out.targets, out.upper, cfg.tolerance, cfg.max_iterations);

  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.dual.alpha[i] > 0.0) sv.push_back(i);
  }
  out.model.support_vectors = Z.select_rows(sv);
  for (auto i : sv) out.model.dual_coef.push_back(out.dual.alpha[i] * out.targets[i]);
  out.model.intercept = -out.dual.rho;
  return out;
}

inline SvmModel train_svc(const Matrix& X, std::span<const ClassLabel> y,
                          const ClassWeights& weights, const SvmConfig& cfg) {
  return train_svc_detailed(X, y, weights, cfg).model;
}

}  // namespace overheat
