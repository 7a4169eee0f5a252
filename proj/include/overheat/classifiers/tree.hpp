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

// CART with class-weighted Gini impurity.
//
// Every node searches all (or, in a forest, a random subset of) features and
// every midpoint between consecutive distinct sorted values. A sample goes
// left when x[feature] <= threshold. Equal-quality splits resolve to the
// lowest feature index, then the lowest threshold. Leaves predict the class
// with the larger weighted count; an exact tie predicts Anomalous.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "overheat/classifiers/weights.hpp"
#include "overheat/random.hpp"
#include "overheat/types.hpp"

namespace overheat {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, kNumClasses> weight{};  // weighted class counts
  std::size_t samples = 0;
  std::size_t depth = 0;

  bool is_leaf() const noexcept { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

inline ClassLabel argmax_label(const std::array<double, kNumClasses>& w) {
  return w[class_index(ClassLabel::Anomalous)] >= w[class_index(ClassLabel::Nominal)]
             ? ClassLabel::Anomalous
             : ClassLabel::Nominal;
}

struct TreeModel {
  std::size_t n_features = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
      const auto& n = nodes[at];
      at = static_cast<std::size_t>(
          row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[at];
  }

  ClassLabel predict_row(std::span<const double> row) const {
    return argmax_label(leaf_for(row).weight);
  }

  // Class proportions of the weighted training mass in the reached leaf.
  std::array<double, kNumClasses> distribution(std::span<const double> row) const {
    auto w = leaf_for(row).weight;
    const double total = w[0] + w[1];
    if (total > 0) {
      w[0] /= total;
      w[1] /= total;
    }
    return w;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
  }

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // sum_c W_Lc^2 / W_L + sum_c W_Rc^2 / W_R
};

// Gains closer than this (relative to the node's weight) count as ties.
inline constexpr double kSplitTieTolerance = 1e-12;

inline bool better_split(const SplitChoice& best, double score, std::size_t feature,
                         double threshold, double tie_eps) {
  if (!best.found) return true;
  if (score > best.score + tie_eps) return true;
  if (score < best.score - tie_eps) return false;
  if (feature != best.feature) return feature < best.feature;
  return threshold < best.threshold;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const ClassLabel> y,
              std::span<const double> sample_weight, const TreeConfig& cfg,
              std::optional<std::size_t> max_features, Rng* rng)
      : X_(X), y_(y), w_(sample_weight), cfg_(cfg), max_features_(max_features), rng_(rng) {}

  TreeModel build(std::vector<std::size_t> rows) {
    model_.n_features = X_.cols();
    grow(rows, 0);
    return std::move(model_);
  }

 private:
  int grow(std::span<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(model_.nodes.size());
    model_.nodes.emplace_back();
    {
      auto& node = model_.nodes.back();
      node.samples = rows.size();
      node.depth = depth;
      for (auto r : rows) node.weight[class_index(y_[r])] += w_[r];
    }

    const auto weight = model_.nodes[id].weight;
    const bool pure = weight[0] == 0.0 || weight[1] == 0.0;
    if (pure || depth >= cfg_.max_depth || rows.size() < cfg_.min_samples_split ||
        rows.size() < 2 * cfg_.min_samples_leaf) {
      return id;
    }

    const auto split = find_split(rows, weight[0] + weight[1]);
    if (!split.found) return id;

    auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return X_(r, split.feature) <= split.threshold;
    });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());

    const int left = grow(rows.subspan(0, n_left), depth + 1);
    const int right = grow(rows.subspan(n_left), depth + 1);
    auto& node = model_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  SplitChoice find_split(std::span<const std::size_t> rows, double node_weight) {
    const std::size_t d = X_.cols();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t budget = d;
    if (max_features_) {
      budget = std::min(*max_features_, d);
      if (rng_ != nullptr) rng_->shuffle(std::span<std::size_t>(order));
    }

    const double tie_eps = kSplitTieTolerance * node_weight;
    SplitChoice best;
    std::vector<std::pair<double, std::size_t>> column(rows.size());
    std::size_t visited = 0;
    for (std::size_t f : order) {
      if (visited >= budget) break;
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {X_(rows[i], f), rows[i]};
      std::sort(column.begin(), column.end());
      // Constant features do not count against the candidate budget.
      if (column.front().first == column.back().first) continue;
      ++visited;
      scan_feature(column, f, tie_eps, best);
    }
    return best;
  }

  void scan_feature(const std::vector<std::pair<double, std::size_t>>& column,
                    std::size_t feature, double tie_eps, SplitChoice& best) const {
    std::array<double, kNumClasses> total{};
    for (const auto& [v, r] : column) total[class_index(y_[r])] += w_[r];
    std::array<double, kNumClasses> left{};
    const std::size_t n = column.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto r = column[i].second;
      left[class_index(y_[r])] += w_[r];
      const double lo = column[i].first;
      const double hi = column[i + 1].first;
      if (!(lo < hi)) continue;
      const std::size_t n_left = i + 1;
      if (n_left < cfg_.min_samples_leaf || n - n_left < cfg_.min_samples_leaf) continue;

      const std::array<double, kNumClasses> right{total[0] - left[0], total[1] - left[1]};
      const double wl = left[0] + left[1];
      const double wr = right[0] + right[1];
      const double score = (left[0] * left[0] + left[1] * left[1]) / wl +
                           (right[0] * right[0] + right[1] * right[1]) / wr;
      double threshold = lo + (hi - lo) / 2.0;
      if (!(threshold < hi)) threshold = lo;
      if (better_split(best, score, feature, threshold, tie_eps)) {
        best = {true, feature, threshold, score};
      }
    }
  }

  const Matrix& X_;
  std::span<const ClassLabel> y_;
  std::span<const double> w_;
  TreeConfig cfg_;
  std::optional<std::size_t> max_features_;
  Rng* rng_;
  TreeModel model_;
};

}  // namespace detail

// Grows a tree on `rows` (duplicates allowed, as in a bootstrap sample).
// `sample_weight` is indexed by row of X.
inline TreeModel grow_tree(const Matrix& X, std::span<const ClassLabel> y,
                           std::span<const double> sample_weight,
                           std::vector<std::size_t> rows, const TreeConfig& cfg,
                           std::optional<std::size_t> max_features = std::nullopt,
                           Rng* rng = nullptr) {
  detail::TreeBuilder builder(X, y, sample_weight, cfg, max_features, rng);
  return builder.build(std::move(rows));
}

inline TreeModel train_tree(const Matrix& X, std::span<const ClassLabel> y,
                            const ClassWeights& weights, const TreeConfig& cfg) {
  check_training_data(X, y);
  const auto sw = sample_weights(y, weights);
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return grow_tree(X, y, sw, std::move(rows), cfg);
}

}  // namespace overheat
