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

// Majority-voting ensemble (MVE) framework.
//
//  1. Stratified train/test split.
//  2. Stratified k-fold cross-validation of every pool member on the
//     training portion only.
//  3. Rank members by mean CV F1; keep the top three.
//  4. Refit every member on the whole training portion and predict the
//     test portion.
//  5. Hard majority vote over the top three predictions.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "overheat/classifiers.hpp"
#include "overheat/dataset.hpp"
#include "overheat/evaluation.hpp"
#include "overheat/features.hpp"
#include "overheat/parallel.hpp"

namespace overheat {

inline constexpr std::size_t kEnsembleSize = 3;

struct PoolMember {
  std::string name;
  ClassifierKind kind = ClassifierKind::RandomForest;

  friend bool operator==(const PoolMember&, const PoolMember&) = default;
};

inline std::vector<PoolMember> default_pool() {
  std::vector<PoolMember> pool;
  for (auto k : kDefaultPool) pool.push_back({std::string(to_string(k)), k});
  return pool;
}

struct FrameworkConfig {
  std::vector<PoolMember> pool = default_pool();
  std::size_t k = 5;
  double test_fraction = 0.3;
  bool cost_sensitive = true;
  FeatureSetKind features = FeatureSetKind::MSD;
  std::uint64_t seed = 0;
  TrainConfig train;
  unsigned threads = 1;

  void validate() const {
    if (pool.size() <= kEnsembleSize) {
      throw ConfigError("the classifier pool needs more than 3 members, got " +
                        std::to_string(pool.size()));
    }
    if (k < 2) throw ConfigError("k must be >= 2");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw ConfigError("test fraction must lie in (0, 1)");
    }
    train.validate();
  }
};

struct CvScore {
  std::size_t member = 0;  // index into the pool
  ClassifierKind kind = ClassifierKind::RandomForest;
  double mean_f1 = 0.0;
  double mean_accuracy = 0.0;
};

struct RankedPool {
  std::vector<CvScore> order;  // best first
  std::array<std::size_t, kEnsembleSize> top3{};  // pool indices

  bool in_top3(std::size_t member) const {
    return std::find(top3.begin(), top3.end(), member) != top3.end();
  }
};

// Descending mean CV F1; ties go to higher CV accuracy, then the canonical
// classifier order (RF, DT, LR, SVC), then pool position.
inline RankedPool rank_top3(std::vector<CvScore> scores) {
  if (scores.size() <= kEnsembleSize) {
    throw ConfigError("ranking needs at least 4 cross-validated classifiers, got " +
                      std::to_string(scores.size()));
  }
  std::sort(scores.begin(), scores.end(), [](const CvScore& a, const CvScore& b) {
    if (a.mean_f1 != b.mean_f1) return a.mean_f1 > b.mean_f1;
    if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.member < b.member;
  });
  RankedPool ranked;
  ranked.order = std::move(scores);
  for (std::size_t i = 0; i < kEnsembleSize; ++i) ranked.top3[i] = ranked.order[i].member;
  return ranked;
}

inline std::vector<ClassLabel> majority_vote(
    std::span<const std::vector<ClassLabel>> votes) {
  if (votes.size() != kEnsembleSize) {
    throw ConfigError("majority vote takes exactly 3 voters, got " +
                      std::to_string(votes.size()));
  }
  const std::size_t n = votes[0].size();
  for (const auto& v : votes) {
    if (v.size() != n) {
      throw DataError(DataErrorCode::DimensionMismatch,
                      "majority vote: prediction sequences differ in length");
    }
  }
  std::vector<ClassLabel> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t anomalous = 0;
    for (const auto& v : votes) anomalous += v[i] == ClassLabel::Anomalous;
    out[i] = 2 * anomalous > kEnsembleSize ? ClassLabel::Anomalous : ClassLabel::Nominal;
  }
  return out;
}

struct MemberOutcome {
  PoolMember member;
  CvResult cv;
  std::vector<ClassLabel> test_predictions;
  Metrics test_metrics;
};

struct IterationResult {
  std::uint64_t seed = 0;
  SplitIndices split;       // row indices into the framework's input
  FoldAssignment folds;     // over positions of split.train
  std::vector<MemberOutcome> members;  // pool order
  RankedPool ranking;
  std::vector<ClassLabel> test_truth;
  std::vector<ClassLabel> mve_predictions;
  Metrics mve_metrics;
};

inline IterationResult run_framework(const FeatureMatrix& data, const FrameworkConfig& cfg) {
  cfg.validate();
  if (data.kind != cfg.features) {
    throw ConfigError("feature matrix holds " + std::string(to_string(data.kind)) +
                      " features but the framework is configured for " +
                      std::string(to_string(cfg.features)));
  }

  IterationResult res;
  res.seed = cfg.seed;
  res.split = with_context("split", [&] {
    return stratified_split(data.labels, cfg.test_fraction, derive_seed(cfg.seed, "split"));
  });
  const Matrix X_train = data.rows.select_rows(res.split.train);
  const Matrix X_test = data.rows.select_rows(res.split.test);
  const auto y_train = select<ClassLabel>(data.labels, res.split.train);
  res.test_truth = select<ClassLabel>(data.labels, res.split.test);
  res.folds = with_context("cross-validation", [&] {
    return stratified_kfold(y_train, cfg.k, derive_seed(cfg.seed, "folds"));
  });

  const std::size_t m = cfg.pool.size();
  res.members.resize(m);
  parallel_for(m, cfg.threads, [&](std::size_t i) {
    const auto& member = cfg.pool[i];
    res.members[i].member = member;
    res.members[i].cv = with_context("cross-validation of " + member.name, [&] {
      return cross_validate(member.kind, X_train, y_train, res.folds, cfg.cost_sensitive,
                            cfg.train, derive_seed(cfg.seed, "cv", i));
    });
  });

  std::vector<CvScore> scores;
  for (std::size_t i = 0; i < m; ++i) {
    scores.push_back({i, cfg.pool[i].kind, res.members[i].cv.mean_f1,
                      res.members[i].cv.mean_accuracy});
  }
  res.ranking = rank_top3(std::move(scores));

  const auto weights = training_weights(y_train, cfg.cost_sensitive);
  parallel_for(m, cfg.threads, [&](std::size_t i) {
    auto& out = res.members[i];
    with_context("final fit of " + out.member.name, [&] {
      const auto model = train(out.member.kind, X_train, y_train, weights, cfg.train,
                               derive_seed(cfg.seed, "fit", i));
      out.test_predictions = predict(model, X_test);
      out.test_metrics = evaluate(res.test_truth, out.test_predictions);
    });
  });

  std::vector<std::vector<ClassLabel>> votes;
  for (auto i : res.ranking.top3) votes.push_back(res.members[i].test_predictions);
  res.mve_predictions = majority_vote(votes);
  res.mve_metrics = evaluate(res.test_truth, res.mve_predictions);
  return res;
}

inline IterationResult run_framework(const std::vector<LayerRecord>& records,
                                     const FrameworkConfig& cfg) {
  const auto data =
      with_context("feature extraction", [&] { return build_matrix(records, cfg.features); });
  return run_framework(data, cfg);
}

}  // namespace overheat
