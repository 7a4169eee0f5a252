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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "overheat/classifiers/tree.hpp"
#include "overheat/classifiers/weights.hpp"
#include "overheat/parallel.hpp"
#include "overheat/random.hpp"

namespace overheat {

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;

  // Mean of the per-tree leaf class proportions.
  std::array<double, kNumClasses> distribution(std::span<const double> row) const {
    std::array<double, kNumClasses> sum{};
    for (const auto& t : trees) {
      const auto p = t.distribution(row);
      sum[0] += p[0];
      sum[1] += p[1];
    }
    const double n = static_cast<double>(trees.size());
    return {sum[0] / n, sum[1] / n};
  }

  ClassLabel predict_row(std::span<const double> row) const {
    return argmax_label(distribution(row));
  }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

inline std::size_t default_max_features(std::size_t d) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
}

// Class weights are computed by the caller on the full training set and
// shared by every tree.
inline ForestModel train_forest(const Matrix& X, std::span<const ClassLabel> y,
                                const ClassWeights& weights, const ForestConfig& cfg,
                                std::uint64_t seed) {
  check_training_data(X, y);
  const auto sw = sample_weights(y, weights);
  const std::size_t n = X.rows();
  const std::size_t max_features = cfg.max_features.value_or(default_max_features(X.cols()));

  ForestModel forest;
  forest.trees.resize(cfg.n_estimators);
  forest.tree_seeds.resize(cfg.n_estimators);
  parallel_for(cfg.n_estimators, cfg.threads, [&](std::size_t t) {
    const auto tree_seed = derive_seed(seed, "forest-tree", t);
    Rng rng(tree_seed);
    std::vector<std::size_t> rows(n);
    if (cfg.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.tree_seeds[t] = tree_seed;
    forest.trees[t] = grow_tree(X, y, sw, std::move(rows), cfg.tree, max_features, &rng);
  });
  return forest;
}

}  // namespace overheat
