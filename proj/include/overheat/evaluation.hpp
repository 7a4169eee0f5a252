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
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "overheat/classifiers.hpp"
#include "overheat/error.hpp"
#include "overheat/random.hpp"
#include "overheat/types.hpp"

namespace overheat {

// Anomalous is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

inline ConfusionCounts confusion_counts(std::span<const ClassLabel> truth,
                                        std::span<const ClassLabel> predicted) {
  if (truth.size() != predicted.size()) {
    throw DataError(DataErrorCode::DimensionMismatch,
                    "confusion counts: " + std::to_string(truth.size()) +
                        " true labels vs " + std::to_string(predicted.size()) +
                        " predictions");
  }
  if (truth.empty()) {
    throw DataError(DataErrorCode::InsufficientData, "confusion counts of zero instances");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == ClassLabel::Anomalous;
    const bool flagged = predicted[i] == ClassLabel::Anomalous;
    if (actual && flagged) ++c.tp;
    else if (!actual && flagged) ++c.fp;
    else if (!actual) ++c.tn;
    else ++c.fn;
  }
  return c;
}

// Undefined ratios (0/0) are reported as 0.
inline Metrics metrics_from_counts(const ConfusionCounts& c) {
  if (c.total() == 0) {
    throw DataError(DataErrorCode::InsufficientData, "metrics of zero instances");
  }
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  Metrics m;
  m.precision = (c.tp + c.fp) == 0 ? 0.0 : d(c.tp) / d(c.tp + c.fp);
  m.recall = (c.tp + c.fn) == 0 ? 0.0 : d(c.tp) / d(c.tp + c.fn);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  m.accuracy = d(c.tp + c.tn) / d(c.total());
  return m;
}

inline Metrics evaluate(std::span<const ClassLabel> truth,
                        std::span<const ClassLabel> predicted) {
  return metrics_from_counts(confusion_counts(truth, predicted));
}

// ---------------------------------------------------------------------------
// Stratified splitting

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending

  friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

inline std::array<std::vector<std::size_t>, kNumClasses> indices_by_class(
    std::span<const ClassLabel> labels) {
  std::array<std::vector<std::size_t>, kNumClasses> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out[class_index(labels[i])].push_back(i);
  return out;
}

// Per class: round-half-up of N_c * test_fraction, clamped to [1, N_c - 1].
inline std::size_t stratified_test_count(std::size_t class_size, double test_fraction) {
  const auto raw = static_cast<std::size_t>(
      std::floor(static_cast<double>(class_size) * test_fraction + 0.5));
  return std::clamp<std::size_t>(raw, 1, class_size - 1);
}

inline SplitIndices stratified_split(std::span<const ClassLabel> labels,
                                     double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  auto by_class = indices_by_class(labels);
  SplitIndices split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    if (idx.size() < 2) {
      throw DataError(DataErrorCode::InsufficientData,
                      "class '" + std::string(to_string(static_cast<ClassLabel>(c))) +
                          "' has " + std::to_string(idx.size()) +
                          " instance(s); a stratified split needs at least 2");
    }
    Rng rng(derive_seed(seed, "split", c));
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_test = stratified_test_count(idx.size(), test_fraction);
    split.test.insert(split.test.end(), idx.begin(),
                      idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(),
                       idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;  // fold id per position
  // Folds with no instance of some class. Allowed, but worth surfacing.
  std::vector<bool> missing_class;

  std::vector<std::size_t> held_out(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> training(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

// Each class is shuffled and dealt round-robin. Dealing continues where the
// previous class stopped, so with k = N every fold holds exactly one instance.
inline FoldAssignment stratified_kfold(std::span<const ClassLabel> labels, std::size_t k,
                                       std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (k > labels.size()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " +
                      std::to_string(labels.size()) + " available instances");
  }
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.assign(labels.size(), 0);
  fa.missing_class.assign(k, false);
  auto by_class = indices_by_class(labels);
  std::size_t next = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, "kfold", c));
    rng.shuffle(std::span<std::size_t>(idx));
    std::vector<bool> seen(k, false);
    for (auto i : idx) {
      fa.fold_of[i] = next;
      seen[next] = true;
      next = (next + 1) % k;
    }
    if (!idx.empty()) {
      for (std::size_t f = 0; f < k; ++f) fa.missing_class[f] = fa.missing_class[f] || !seen[f];
    }
  }
  return fa;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CvResult {
  double mean_f1 = 0.0;
  double mean_accuracy = 0.0;
  std::vector<Metrics> folds;
};

inline ClassWeights training_weights(std::span<const ClassLabel> y, bool cost_sensitive) {
  return cost_sensitive ? balanced_weights(y) : ClassWeights::uniform();
}

// Called once per fold with the model trained on the other folds.
using FoldObserver = std::function<void(std::size_t fold, const TrainedModel&)>;

inline CvResult cross_validate(ClassifierKind kind, const Matrix& X,
                               std::span<const ClassLabel> y, const FoldAssignment& folds,
                               bool cost_sensitive, const TrainConfig& cfg,
                               std::uint64_t seed, const FoldObserver& observer = {}) {
  CvResult res;
  for (std::size_t f = 0; f < folds.k; ++f) {
    const auto train_idx = folds.training(f);
    const auto test_idx = folds.held_out(f);
    const auto m = with_context("fold " + std::to_string(f), [&] {
      const Matrix Xtr = X.select_rows(train_idx);
      const auto ytr = select<ClassLabel>(y, train_idx);
      const auto model = train(kind, Xtr, ytr, training_weights(ytr, cost_sensitive), cfg,
                               derive_seed(seed, "cv-fit", f));
      if (observer) observer(f, model);
      const auto pred = predict(model, X.select_rows(test_idx));
      return evaluate(select<ClassLabel>(y, test_idx), pred);
    });
    res.folds.push_back(m);
  }
  for (const auto& m : res.folds) {
    res.mean_f1 += m.f1;
    res.mean_accuracy += m.accuracy;
  }
  res.mean_f1 /= static_cast<double>(res.folds.size());
  res.mean_accuracy /= static_cast<double>(res.folds.size());
  return res;
}

inline CvResult cross_validate(ClassifierKind kind, const Matrix& X,
                               std::span<const ClassLabel> y, std::size_t k,
                               bool cost_sensitive, const TrainConfig& cfg,
                               std::uint64_t seed, const FoldObserver& observer = {}) {
  const auto folds = stratified_kfold(y, k, derive_seed(seed, "folds"));
  return cross_validate(kind, X, y, folds, cost_sensitive, cfg, seed, observer);
}

}  // namespace overheat
