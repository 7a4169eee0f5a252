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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "overheat/classifiers/forest.hpp"
#include "overheat/classifiers/logistic.hpp"
#include "overheat/classifiers/svm.hpp"
#include "overheat/classifiers/tree.hpp"
#include "overheat/classifiers/weights.hpp"
#include "overheat/random.hpp"

namespace overheat {

// Declaration order is the canonical order used to break ranking ties.
// ConstantNominal always predicts Nominal; it exists for tests and baselines.
enum class ClassifierKind {
  RandomForest,
  DecisionTree,
  LogisticRegression,
  SupportVector,
  ConstantNominal,
};

inline constexpr ClassifierKind kDefaultPool[] = {
    ClassifierKind::RandomForest, ClassifierKind::DecisionTree,
    ClassifierKind::LogisticRegression, ClassifierKind::SupportVector};

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::RandomForest: return "RF";
    case ClassifierKind::DecisionTree: return "DT";
    case ClassifierKind::LogisticRegression: return "LR";
    case ClassifierKind::SupportVector: return "SVC";
    case ClassifierKind::ConstantNominal: return "CONST";
  }
  return "?";
}

inline ClassifierKind parse_classifier(std::string_view s) {
  if (s == "RF" || s == "rf") return ClassifierKind::RandomForest;
  if (s == "DT" || s == "dt") return ClassifierKind::DecisionTree;
  if (s == "LR" || s == "lr") return ClassifierKind::LogisticRegression;
  if (s == "SVC" || s == "svc") return ClassifierKind::SupportVector;
  if (s == "CONST" || s == "const") return ClassifierKind::ConstantNominal;
  throw ConfigError("unknown classifier '" + std::string(s) + "'");
}

struct ConstantModel {
  ClassLabel label = ClassLabel::Nominal;
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::ConstantNominal;
  std::size_t n_features = 0;
  TrainConfig config;
  std::variant<LogisticModel, TreeModel, ForestModel, SvmModel, ConstantModel> params;

  ClassLabel predict_row(std::span<const double> row) const {
    return std::visit(
        [&](const auto& m) -> ClassLabel {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConstantModel>) {
            return m.label;
          } else {
            return m.predict_row(row);
          }
        },
        params);
  }
};

// Trains one pool member. LR and SVC fit their own standardizer on X.
inline TrainedModel train(ClassifierKind kind, const Matrix& X,
                          std::span<const ClassLabel> y, const ClassWeights& weights,
                          const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  TrainedModel m;
  m.kind = kind;
  m.n_features = X.cols();
  m.config = cfg;
  switch (kind) {
    case ClassifierKind::RandomForest:
      m.params = train_forest(X, y, weights, cfg.forest, seed);
      break;
    case ClassifierKind::DecisionTree:
      m.params = train_tree(X, y, weights, cfg.tree);
      break;
    case ClassifierKind::LogisticRegression:
      m.params = train_logistic(X, y, weights, cfg.logistic);
      break;
    case ClassifierKind::SupportVector:
      m.params = train_svc(X, y, weights, cfg.svm);
      break;
    case ClassifierKind::ConstantNominal:
      check_training_data(X, y);
      m.params = ConstantModel{};
      break;
  }
  return m;
}

inline std::vector<ClassLabel> predict(const TrainedModel& model, const Matrix& X) {
  if (X.cols() != model.n_features) {
    throw DataError(DataErrorCode::DimensionMismatch,
                    "model expects " + std::to_string(model.n_features) +
                        " features, rows have " + std::to_string(X.cols()));
  }
  std::vector<ClassLabel> out;
  out.reserve(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out.push_back(model.predict_row(X.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization. Doubles are written in shortest round-trip form, so a
// reloaded model predicts bit-identically.

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json standardizer_json(const Standardizer& s) {
  return {{"mean", s.mean}, {"scale", s.scale}, {"constant", s.constant}};
}

inline Standardizer standardizer_from(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  s.constant = j.at("constant").get<std::vector<bool>>();
  if (s.scale.size() != s.mean.size() || s.constant.size() != s.mean.size()) {
    throw DataError(DataErrorCode::MalformedRow, "standardizer arrays differ in length");
  }
  return s;
}

inline json tree_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.weight[0], n.weight[1],
                     n.samples, n.depth});
  }
  return {{"n_features", t.n_features}, {"nodes", std::move(nodes)}};
}

inline TreeModel tree_from(const json& j) {
  TreeModel t;
  t.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& a : j.at("nodes")) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.weight = {a.at(4).get<double>(), a.at(5).get<double>()};
    n.samples = a.at(6).get<std::size_t>();
    n.depth = a.at(7).get<std::size_t>();
    t.nodes.push_back(n);
  }
  const auto count = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count ||
                         n.right >= count ||
                         static_cast<std::size_t>(n.feature) >= t.n_features)) {
      throw DataError(DataErrorCode::MalformedRow, "tree node references are out of range");
    }
  }
  if (t.nodes.empty()) throw DataError(DataErrorCode::MalformedRow, "tree has no nodes");
  return t;
}

inline json tree_config_json(const TreeConfig& c) {
  return {{"max_depth", c.max_depth},
          {"min_samples_split", c.min_samples_split},
          {"min_samples_leaf", c.min_samples_leaf}};
}

inline TreeConfig tree_config_from(const json& j) {
  TreeConfig c;
  c.max_depth = j.at("max_depth").get<std::size_t>();
  c.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  return c;
}

inline json config_json(const TrainConfig& c) {
  json forest = {{"n_estimators", c.forest.n_estimators},
                 {"tree", tree_config_json(c.forest.tree)},
                 {"bootstrap", c.forest.bootstrap}};
  forest["max_features"] =
      c.forest.max_features ? json(*c.forest.max_features) : json(nullptr);
  return {{"forest", std::move(forest)},
          {"tree", tree_config_json(c.tree)},
          {"logistic",
           {{"C", c.logistic.C},
            {"max_iterations", c.logistic.max_iterations},
            {"tolerance", c.logistic.tolerance}}},
          {"svm",
           {{"C", c.svm.C},
            {"kernel", "rbf"},
            {"gamma", "scale"},
            {"tolerance", c.svm.tolerance},
            {"max_iterations", c.svm.max_iterations}}}};
}

inline TrainConfig config_from(const json& j) {
  TrainConfig c;
  const auto& f = j.at("forest");
  c.forest.n_estimators = f.at("n_estimators").get<std::size_t>();
  c.forest.tree = tree_config_from(f.at("tree"));
  c.forest.bootstrap = f.at("bootstrap").get<bool>();
  if (!f.at("max_features").is_null()) {
    c.forest.max_features = f.at("max_features").get<std::size_t>();
  }
  c.tree = tree_config_from(j.at("tree"));
  c.logistic.C = j.at("logistic").at("C").get<double>();
  c.logistic.max_iterations = j.at("logistic").at("max_iterations").get<std::size_t>();
  c.logistic.tolerance = j.at("logistic").at("tolerance").get<double>();
  c.svm.C = j.at("svm").at("C").get<double>();
  c.svm.tolerance = j.at("svm").at("tolerance").get<double>();
  c.svm.max_iterations = j.at("svm").at("max_iterations").get<std::size_t>();
  return c;
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
  using nlohmann::json;
  json params = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          return {{"standardizer", detail::standardizer_json(p.standardizer)},
                  {"coefficients", p.coefficients},
                  {"intercept", p.intercept},
                  {"iterations", p.iterations},
                  {"converged", p.converged}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return detail::tree_json(p);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(detail::tree_json(t));
          return {{"trees", std::move(trees)}, {"tree_seeds", p.tree_seeds}};
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          json sv = json::array();
          for (std::size_t i = 0; i < p.support_vectors.rows(); ++i) {
            const auto r = p.support_vectors.row(i);
            sv.push_back(std::vector<double>(r.begin(), r.end()));
          }
          return {{"standardizer", detail::standardizer_json(p.standardizer)},
                  {"support_vectors", std::move(sv)},
                  {"dual_coef", p.dual_coef},
                  {"intercept", p.intercept},
                  {"gamma", p.gamma}};
        } else {
          return {{"label", to_string(p.label)}};
        }
      },
      m.params);
  return {{"format_version", kModelFormatVersion},
          {"kind", to_string(m.kind)},
          {"n_features", m.n_features},
          {"hyperparameters", detail::config_json(m.config)},
          {"parameters", std::move(params)}};
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw DataError(DataErrorCode::MalformedRow, "unsupported model format version");
    }
    TrainedModel m;
    m.kind = parse_classifier(j.at("kind").get<std::string>());
    m.n_features = j.at("n_features").get<std::size_t>();
    m.config = detail::config_from(j.at("hyperparameters"));
    const auto& p = j.at("parameters");
    switch (m.kind) {
      case ClassifierKind::LogisticRegression: {
        LogisticModel lm;
        lm.standardizer = detail::standardizer_from(p.at("standardizer"));
        lm.coefficients = p.at("coefficients").get<std::vector<double>>();
        lm.intercept = p.at("intercept").get<double>();
        lm.iterations = p.at("iterations").get<std::size_t>();
        lm.converged = p.at("converged").get<bool>();
        if (lm.coefficients.size() != m.n_features ||
            lm.standardizer.dimension() != m.n_features) {
          throw DataError(DataErrorCode::DimensionMismatch, "logistic model width mismatch");
        }
        m.params = std::move(lm);
        break;
      }
      case ClassifierKind::DecisionTree:
        m.params = detail::tree_from(p);
        break;
      case ClassifierKind::RandomForest: {
        ForestModel fm;
        for (const auto& t : p.at("trees")) fm.trees.push_back(detail::tree_from(t));
        fm.tree_seeds = p.at("tree_seeds").get<std::vector<std::uint64_t>>();
        if (fm.trees.empty() || fm.tree_seeds.size() != fm.trees.size()) {
          throw DataError(DataErrorCode::MalformedRow, "forest trees and seeds disagree");
        }
        m.params = std::move(fm);
        break;
      }
      case ClassifierKind::SupportVector: {
        SvmModel sm;
        sm.standardizer = detail::standardizer_from(p.at("standardizer"));
        for (const auto& r : p.at("support_vectors")) {
          sm.support_vectors.append_row(r.get<std::vector<double>>());
        }
        sm.dual_coef = p.at("dual_coef").get<std::vector<double>>();
        sm.intercept = p.at("intercept").get<double>();
        sm.gamma = p.at("gamma").get<double>();
        if (sm.dual_coef.size() != sm.support_vectors.rows() ||
            sm.standardizer.dimension() != m.n_features ||
            (sm.support_vectors.rows() > 0 && sm.support_vectors.cols() != m.n_features)) {
          throw DataError(DataErrorCode::DimensionMismatch, "svm model width mismatch");
        }
        m.params = std::move(sm);
        break;
      }
      case ClassifierKind::ConstantNominal:
        m.params = ConstantModel{parse_class_label(p.at("label").get<std::string>())};
        break;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorCode::MalformedRow, std::string("model document: ") + e.what());
  }
}

}  // namespace overheat
