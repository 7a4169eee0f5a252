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

// Reference implementations used as test oracles. They are deliberately
// written without reusing library code paths: long-double accumulation,
// impurity-form split search, active-set enumeration for the SVM dual.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "overheat/overheat.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Statistics

// Level p = num/den; h = (n-1)p is split into integer and fractional parts
// exactly.
inline double quantile(std::vector<double> s, long num, long den) {
  std::sort(s.begin(), s.end());
  const long scaled = static_cast<long>(s.size() - 1) * num;
  const auto lo = static_cast<std::size_t>(scaled / den);
  const auto hi = std::min(lo + 1, s.size() - 1);
  const long double frac =
      static_cast<long double>(scaled % den) / static_cast<long double>(den);
  return static_cast<double>((1.0L - frac) * s[lo] + frac * s[hi]);
}

inline double mean(const std::vector<double>& s) {
  long double acc = 0.0L;
  for (double v : s) acc += v;
  return static_cast<double>(acc / static_cast<long double>(s.size()));
}

inline double population_std(const std::vector<double>& s) {
  long double acc = 0.0L;
  for (double v : s) acc += v;
  const long double mu = acc / static_cast<long double>(s.size());
  long double ss = 0.0L;
  for (double v : s) ss += (v - mu) * (v - mu);
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(s.size())));
}

// Feature vector spelled out per set: mean, std, listed quantiles, max.
inline std::vector<double> features(const std::vector<double>& s,
                                    overheat::FeatureSetKind kind) {
  std::vector<std::pair<long, long>> levels;
  switch (kind) {
    case overheat::FeatureSetKind::MSMM: levels = {{1, 2}}; break;
    case overheat::FeatureSetKind::MSQ: levels = {{1, 4}, {1, 2}, {3, 4}}; break;
    case overheat::FeatureSetKind::MSD:
      for (long k = 1; k <= 9; ++k) levels.emplace_back(k, 10);
      break;
  }
  std::vector<double> out{mean(s), population_std(s)};
  for (auto [num, den] : levels) out.push_back(quantile(s, num, den));
  out.push_back(*std::max_element(s.begin(), s.end()));
  return out;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return a == b ? 0.0 : std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Metrics as exact fractions

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 0;  // 0 encodes "undefined", reported as 0
  double value() const {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  }
};

struct ExactMetrics {
  Fraction precision, recall, f1, accuracy;
};

inline ExactMetrics exact_metrics(std::int64_t tp, std::int64_t fp, std::int64_t tn,
                                  std::int64_t fn) {
  ExactMetrics m;
  m.precision = {tp, tp + fp};
  m.recall = {tp, tp + fn};
  // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN); zero whenever TP = 0.
  m.f1 = tp == 0 ? Fraction{0, 1} : Fraction{2 * tp, 2 * tp + fp + fn};
  m.accuracy = {tp + tn, tp + fp + tn + fn};
  return m;
}

// ---------------------------------------------------------------------------
// Exhaustive weighted CART

struct TreeSample {
  std::vector<double> x;
  bool anomalous = false;
  double weight = 1.0;
};

class BruteForceTree {
 public:
  BruteForceTree(std::vector<TreeSample> data, std::size_t max_depth = 20)
      : data_(std::move(data)), max_depth_(max_depth) {
    std::vector<std::size_t> all(data_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    root_ = build(all, 0);
  }

  bool predict_anomalous(const std::vector<double>& x) const {
    const Node* n = root_.get();
    while (n->left) n = x[n->feature] <= n->threshold ? n->left.get() : n->right.get();
    return n->w_anom >= n->w_nom;
  }

 private:
  struct Node {
    std::size_t feature = 0;
    double threshold = 0.0;
    double w_nom = 0.0, w_anom = 0.0;
    std::unique_ptr<Node> left, right;
  };

  static double gini(double a, double b) {
    const double t = a + b;
    if (t <= 0.0) return 0.0;
    return 1.0 - (a / t) * (a / t) - (b / t) * (b / t);
  }

  std::unique_ptr<Node> build(const std::vector<std::size_t>& idx, std::size_t depth) {
    auto node = std::make_unique<Node>();
    for (auto i : idx) (data_[i].anomalous ? node->w_anom : node->w_nom) += data_[i].weight;
    if (node->w_anom == 0.0 || node->w_nom == 0.0 || depth >= max_depth_ || idx.size() < 2) {
      return node;
    }
    const double total = node->w_anom + node->w_nom;
    const double parent = total * gini(node->w_nom, node->w_anom);

    bool found = false;
    double best_gain = 0.0, best_thr = 0.0;
    std::size_t best_f = 0;
    const std::size_t d = data_[idx[0]].x.size();
    for (std::size_t f = 0; f < d; ++f) {
      std::vector<double> values;
      for (auto i : idx) values.push_back(data_[i].x[f]);
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double thr = (values[k] + values[k + 1]) / 2.0;
        double ln = 0, la = 0, rn = 0, ra = 0;
        for (auto i : idx) {
          const bool left = data_[i].x[f] <= thr;
          double& slot = data_[i].anomalous ? (left ? la : ra) : (left ? ln : rn);
          slot += data_[i].weight;
        }
        const double gain =
            parent - (ln + la) * gini(ln, la) - (rn + ra) * gini(rn, ra);
        const double eps = 1e-9 * total;
        if (!found || gain > best_gain + eps) {
          found = true;
          best_gain = gain;
          best_f = f;
          best_thr = thr;
        }
        // Later candidates within tolerance never win: same feature with a
        // larger threshold, or a larger feature index.
      }
    }
    if (!found) return node;

    std::vector<std::size_t> li, ri;
    for (auto i : idx) (data_[i].x[best_f] <= best_thr ? li : ri).push_back(i);
    node->feature = best_f;
    node->threshold = best_thr;
    node->left = build(li, depth + 1);
    node->right = build(ri, depth + 1);
    return node;
  }

  std::vector<TreeSample> data_;
  std::size_t max_depth_;
  std::unique_ptr<Node> root_;
};

// ---------------------------------------------------------------------------
// SVM dual by active-set enumeration

inline double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& t,
                             const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd at = alpha.cwiseProduct(t);
  return alpha.sum() - 0.5 * at.dot(K * at);
}

// Maximum of the dual over every assignment of each alpha_i to {0, C_i, free}.
// Exponential in n; intended for n <= 8.
inline double svm_dual_optimum(const Eigen::MatrixXd& K, const Eigen::VectorXd& t,
                               const Eigen::VectorXd& C) {
  const int n = static_cast<int>(t.size());
  const Eigen::MatrixXd Q = (t * t.transpose()).cwiseProduct(K);
  double best = -std::numeric_limits<double>::infinity();
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  std::vector<int> state(static_cast<std::size_t>(n));
  for (int code = 0; code < combos; ++code) {
    int c = code;
    std::vector<int> free;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = c % 3;
      c /= 3;
      if (state[static_cast<std::size_t>(i)] == 1) alpha(i) = C(i);
      if (state[static_cast<std::size_t>(i)] == 2) free.push_back(i);
    }
    const int m = static_cast<int>(free.size());
    if (m == 0) {
      if (std::abs(alpha.dot(t)) > 1e-12) continue;
    } else {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      const Eigen::VectorXd q_bound = Q * alpha;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) A(a, b) = Q(free[a], free[b]);
        A(a, m) = t(free[a]);
        A(m, a) = t(free[a]);
        rhs(a) = 1.0 - q_bound(free[a]);
      }
      rhs(m) = -alpha.dot(t);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd sol = lu.solve(rhs);
      bool feasible = true;
      for (int a = 0; a < m; ++a) {
        const double v = sol(a);
        if (v < -1e-9 || v > C(free[a]) + 1e-9) feasible = false;
        alpha(free[a]) = std::clamp(v, 0.0, C(free[a]));
      }
      if (!feasible) continue;
    }
    best = std::max(best, dual_objective(K, t, alpha));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Gradient by central differences

template <typename F>
std::vector<double> central_difference(F&& f, std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    const double step = h * std::max(1.0, std::abs(saved));
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures

struct LabeledData {
  overheat::Matrix X;
  std::vector<overheat::ClassLabel> y;
};

// Two overlapping Gaussian classes; `minority_every` picks the anomalous
// share (e.g. 10 gives 9:1). Values are rounded to `decimals` so that some
// points coincide, as with quantized sensor readings.
inline LabeledData overlapping_gaussians(std::size_t n, std::size_t d, std::uint64_t seed,
                                         std::size_t minority_every = 10,
                                         double separation = 1.0, int decimals = -1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  LabeledData out;
  out.X = overheat::Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const bool anomalous = i % minority_every == minority_every - 1;
    out.y.push_back(anomalous ? overheat::ClassLabel::Anomalous : overheat::ClassLabel::Nominal);
    for (std::size_t j = 0; j < d; ++j) {
      double v = z(gen) + (anomalous ? separation : 0.0);
      if (decimals >= 0) {
        const double s = std::pow(10.0, decimals);
        v = std::round(v * s) / s;
      }
      out.X(i, j) = v;
    }
  }
  return out;
}

}  // namespace oracle
