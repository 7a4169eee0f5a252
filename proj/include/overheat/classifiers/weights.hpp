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

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overheat/error.hpp"
#include "overheat/types.hpp"

namespace overheat {

// Per-class misclassification weights, indexed by class_index().
struct ClassWeights {
  std::array<double, kNumClasses> w{1.0, 1.0};

  double operator[](ClassLabel c) const { return w[class_index(c)]; }

  static ClassWeights uniform() { return {}; }

  friend bool operator==(const ClassWeights&, const ClassWeights&) = default;
};

inline std::array<std::size_t, kNumClasses> class_counts(
    std::span<const ClassLabel> labels) {
  std::array<std::size_t, kNumClasses> counts{};
  for (auto c : labels) ++counts[class_index(c)];
  return counts;
}

// "Balanced" weights w_c = N / (K * N_c); the total weight stays N.
inline ClassWeights balanced_weights(std::span<const ClassLabel> labels) {
  const auto counts = class_counts(labels);
  ClassWeights cw;
  const double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) {
      throw DataError(DataErrorCode::InsufficientData,
                      "class '" + std::string(to_string(static_cast<ClassLabel>(c))) +
                          "' has no instances; balanced weights are undefined");
    }
    cw.w[c] = n / (static_cast<double>(kNumClasses) * static_cast<double>(counts[c]));
  }
  return cw;
}

inline std::vector<double> sample_weights(std::span<const ClassLabel> labels,
                                          const ClassWeights& cw) {
  std::vector<double> out;
  out.reserve(labels.size());
  for (auto c : labels) out.push_back(cw[c]);
  return out;
}

// Hyperparameters. Defaults are the fixed values of the reference setup.

struct TreeConfig {
  std::size_t max_depth = 20;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct ForestConfig {
  std::size_t n_estimators = 200;
  TreeConfig tree;
  bool bootstrap = true;
  // Candidate features per split; unset means floor(sqrt(d)).
  std::optional<std::size_t> max_features;
  unsigned threads = 1;
};

struct LogisticConfig {
  double C = 1.0;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-6;
};

struct SvmConfig {
  double C = 1.0;
  double tolerance = 1e-3;
  std::size_t max_iterations = 1'000'000;
};

struct TrainConfig {
  ForestConfig forest;
  TreeConfig tree;
  LogisticConfig logistic;
  SvmConfig svm;

  void validate() const {
    auto check_tree = [](const TreeConfig& t, const char* who) {
      if (t.max_depth < 1 || t.min_samples_split < 1 || t.min_samples_leaf < 1) {
        throw ConfigError(std::string(who) + ": tree size limits must be >= 1");
      }
    };
    check_tree(tree, "tree");
    check_tree(forest.tree, "forest");
    if (forest.n_estimators < 1) throw ConfigError("forest: n_estimators must be >= 1");
    if (forest.max_features && *forest.max_features < 1) {
      throw ConfigError("forest: max_features must be >= 1");
    }
    if (!(logistic.C > 0) || !(logistic.tolerance > 0) || logistic.max_iterations < 1) {
      throw ConfigError("logistic: C, tolerance and max_iterations must be positive");
    }
    if (!(svm.C > 0) || !(svm.tolerance > 0) || svm.max_iterations < 1) {
      throw ConfigError("svm: C, tolerance and max_iterations must be positive");
    }
  }
};

inline void check_training_data(const Matrix& X, std::span<const ClassLabel> y) {
  if (X.rows() != y.size()) {
    throw DataError(DataErrorCode::DimensionMismatch,
                    std::to_string(X.rows()) + " feature rows but " +
                        std::to_string(y.size()) + " labels");
  }
  if (X.rows() == 0) {
    throw DataError(DataErrorCode::InsufficientData, "no training samples");
  }
  for (double v : X.values()) {
    if (!std::isfinite(v)) {
      throw DataError(DataErrorCode::InvalidSample, "non-finite feature value");
    }
  }
}

inline void require_both_classes(std::span<const ClassLabel> y, const char* who) {
  const auto counts = class_counts(y);
  if (counts[0] == 0 || counts[1] == 0) {
    throw DataError(DataErrorCode::InsufficientData,
                    std::string(who) + " needs both classes in the training data");
  }
}

}  // namespace overheat
