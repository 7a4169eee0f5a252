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
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "overheat/dataset.hpp"
#include "overheat/error.hpp"
#include "overheat/parallel.hpp"
#include "overheat/types.hpp"

namespace overheat {

// MSMM: mean, std, median, max.
// MSQ:  mean, std, quartiles, max.
// MSD:  mean, std, the nine interior deciles, max.
enum class FeatureSetKind { MSMM, MSQ, MSD };

inline constexpr FeatureSetKind kAllFeatureSets[] = {
    FeatureSetKind::MSMM, FeatureSetKind::MSQ, FeatureSetKind::MSD};

inline std::string_view to_string(FeatureSetKind k) {
  switch (k) {
    case FeatureSetKind::MSMM: return "msmm";
    case FeatureSetKind::MSQ: return "msq";
    case FeatureSetKind::MSD: return "msd";
  }
  return "?";
}

inline FeatureSetKind parse_feature_set(std::string_view s) {
  if (s == "msmm" || s == "MSMM") return FeatureSetKind::MSMM;
  if (s == "msq" || s == "MSQ") return FeatureSetKind::MSQ;
  if (s == "msd" || s == "MSD") return FeatureSetKind::MSD;
  throw ConfigError("unknown feature set '" + std::string(s) + "'");
}

// Probabilities of the quantile entries, in column order.
inline std::vector<double> quantile_levels(FeatureSetKind k) {
  switch (k) {
    case FeatureSetKind::MSMM: return {0.5};
    case FeatureSetKind::MSQ: return {0.25, 0.5, 0.75};
    case FeatureSetKind::MSD:
      return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  }
  return {};
}

inline std::size_t feature_dimension(FeatureSetKind k) {
  return quantile_levels(k).size() + 3;
}

inline std::vector<std::string> feature_names(FeatureSetKind k) {
  std::vector<std::string> names{"mean", "std"};
  for (double p : quantile_levels(k)) {
    names.push_back("p" + std::to_string(static_cast<int>(std::lround(p * 100))));
  }
  names.push_back("max");
  return names;
}

// Linear-interpolation quantile on already sorted, finite data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double a = sorted[lo];
  const double b = sorted[lo + 1];
  return std::clamp(a + (h - static_cast<double>(lo)) * (b - a), a, b);
}

inline double quantile(std::span<const double> samples, double p) {
  if (samples.empty()) {
    throw DataError(DataErrorCode::Validation, "quantile of an empty sequence");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DataError(DataErrorCode::Validation,
                    "quantile level " + format_double(p) + " outside [0, 1]");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw DataError(DataErrorCode::InvalidSample,
                      "quantile input holds a non-finite sample");
    }
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

struct FeatureVector {
  FeatureSetKind kind = FeatureSetKind::MSMM;
  std::vector<double> values;
};

inline FeatureVector extract_features(std::span<const double> samples,
                                      FeatureSetKind kind) {
  if (samples.empty()) {
    throw DataError(DataErrorCode::Validation, "cannot extract features from an empty signal");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) {
      throw DataError(DataErrorCode::InvalidSample, "signal holds a non-finite sample");
    }
  }
  std::sort(sorted.begin(), sorted.end());

  // Sum in sorted order so the result is permutation invariant.
  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double stddev = std::sqrt(ss / n);

  FeatureVector fv;
  fv.kind = kind;
  fv.values.reserve(feature_dimension(kind));
  fv.values.push_back(mean);
  fv.values.push_back(stddev);
  for (double p : quantile_levels(kind)) fv.values.push_back(quantile_sorted(sorted, p));
  fv.values.push_back(sorted.back());
  return fv;
}

inline FeatureVector extract_features(const LayerRecord& record,
                                      FeatureSetKind kind) {
  return with_context("layer " + std::to_string(record.layer_index),
                      [&] { return extract_features(record.samples, kind); });
}

struct FeatureMatrix {
  FeatureSetKind kind = FeatureSetKind::MSMM;
  Matrix rows;
  std::vector<ClassLabel> labels;
  std::vector<LayerLabel> layer_labels;
  std::vector<std::size_t> layer_indices;

  std::size_t size() const noexcept { return labels.size(); }

  FeatureMatrix subset(std::span<const std::size_t> indices) const {
    FeatureMatrix out;
    out.kind = kind;
    out.rows = rows.select_rows(indices);
    out.labels = select<ClassLabel>(labels, indices);
    out.layer_labels = select<LayerLabel>(layer_labels, indices);
    out.layer_indices = select<std::size_t>(layer_indices, indices);
    return out;
  }
};

inline FeatureMatrix build_matrix(const std::vector<LayerRecord>& records,
                                  FeatureSetKind kind, unsigned threads = 1) {
  if (records.empty()) {
    throw DataError(DataErrorCode::InsufficientData,
                    "cannot build a feature matrix from zero records");
  }
  const std::size_t dim = feature_dimension(kind);
  FeatureMatrix m;
  m.kind = kind;
  m.rows = Matrix(records.size(), dim);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const auto fv = extract_features(records[i], kind);
    std::copy(fv.values.begin(), fv.values.end(), m.rows.row(i).begin());
  });
  for (const auto& r : records) {
    m.labels.push_back(r.class_label);
    m.layer_labels.push_back({r.layer_type, r.class_label});
    m.layer_indices.push_back(r.layer_index);
  }
  return m;
}

inline void write_feature_csv(const FeatureMatrix& m,
                              const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  for (const auto& name : feature_names(m.kind)) out << name << ',';
  out << "label\n";
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (double v : m.rows.row(r)) out << format_double(v) << ',';
    out << to_string(m.labels[r]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Standardization for the scale-sensitive classifiers.

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  // Columns with (near) zero spread pass through untouched.
  std::vector<bool> constant;

  std::size_t dimension() const noexcept { return mean.size(); }

  void transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) {
      out[j] = constant[j] ? in[j] : (in[j] - mean[j]) / scale[j];
    }
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline Standardizer fit_standardizer(const Matrix& train) {
  if (train.empty()) {
    throw DataError(DataErrorCode::InsufficientData,
                    "cannot fit a standardizer on zero rows");
  }
  const std::size_t d = train.cols();
  const double n = static_cast<double>(train.rows());
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  s.constant.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) sum += train(i, j);
    const double mu = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      ss += (train(i, j) - mu) * (train(i, j) - mu);
    }
    const double sd = std::sqrt(ss / n);
    s.mean[j] = mu;
    if (sd <= 1e-12 * std::max(1.0, std::abs(mu))) {
      s.constant[j] = true;
    } else {
      s.scale[j] = sd;
    }
  }
  return s;
}

inline Matrix standardize(const Matrix& rows, const Standardizer& s) {
  if (rows.cols() != s.dimension()) {
    throw DataError(DataErrorCode::DimensionMismatch,
                    "standardizer fitted on " + std::to_string(s.dimension()) +
                        " columns applied to " + std::to_string(rows.cols()));
  }
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < rows.rows(); ++i) s.transform_row(rows.row(i), out.row(i));
  return out;
}

}  // namespace overheat
