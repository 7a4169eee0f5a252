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

// Repeated-iteration experiment protocol and its reports.
//
// Seeds: iteration i runs with derive_seed(root, "iteration", i); every
// feature set in that iteration shares the seed, hence the same split and
// folds. Results never depend on the thread count.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "overheat/dataset.hpp"
#include "overheat/ensemble.hpp"
#include "overheat/features.hpp"
#include "overheat/parallel.hpp"

namespace overheat {

enum class ExperimentMode { CostSensitive, UniformWeights, Undersampled };

inline std::string_view to_string(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::CostSensitive: return "cost-sensitive";
    case ExperimentMode::UniformWeights: return "uniform";
    case ExperimentMode::Undersampled: return "undersample";
  }
  return "?";
}

inline ExperimentMode parse_mode(std::string_view s) {
  if (s == "cost-sensitive") return ExperimentMode::CostSensitive;
  if (s == "uniform") return ExperimentMode::UniformWeights;
  if (s == "undersample") return ExperimentMode::Undersampled;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

struct ExperimentConfig {
  // Dataset directory; when unset, the synthetic benchmark is generated.
  std::optional<std::filesystem::path> data_path;
  GeneratorConfig generator;
  std::vector<FeatureSetKind> feature_sets{kAllFeatureSets[0], kAllFeatureSets[1],
                                           kAllFeatureSets[2]};
  std::size_t iterations = 100;
  std::size_t k = 5;
  double test_fraction = 0.3;
  ExperimentMode mode = ExperimentMode::CostSensitive;
  std::uint64_t root_seed = 0;
  std::vector<PoolMember> pool = default_pool();
  TrainConfig train;
  unsigned threads = 0;

  void validate() const {
    if (feature_sets.empty()) throw ConfigError("no feature set selected");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (k < 2) throw ConfigError("k must be >= 2");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw ConfigError("test fraction must lie in (0, 1)");
    }
    if (pool.size() <= kEnsembleSize) throw ConfigError("pool needs more than 3 members");
    train.validate();
    if (!data_path) generator.validate();
  }
};

struct IterationRecord {
  std::size_t iteration = 0;
  FeatureSetKind feature_set = FeatureSetKind::MSD;
  IterationResult result;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  bool std_defined = false;  // false for a single value
};

// Arithmetic mean and sample (n - 1) standard deviation.
inline MeanStd summarize(std::span<const double> values) {
  if (values.empty()) {
    throw DataError(DataErrorCode::InsufficientData, "cannot summarize zero values");
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd out;
  out.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
    out.std_defined = true;
  }
  return out;
}

inline constexpr std::string_view kEnsembleName = "MVE";

struct SummaryRow {
  FeatureSetKind feature_set = FeatureSetKind::MSD;
  std::string classifier;
  MeanStd f1;
  MeanStd accuracy;
  std::size_t top3_count = 0;
  std::size_t iterations = 0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  const SummaryRow* find(FeatureSetKind fs, std::string_view classifier) const {
    for (const auto& r : rows) {
      if (r.feature_set == fs && r.classifier == classifier) return &r;
    }
    return nullptr;
  }
};

// One MVE row plus one row per pool member for every feature set, in the
// order the feature sets first appear.
inline SummaryTable summarize(const std::vector<IterationRecord>& records) {
  if (records.empty()) {
    throw DataError(DataErrorCode::InsufficientData, "no iteration results to summarize");
  }
  std::vector<FeatureSetKind> sets;
  for (const auto& r : records) {
    if (std::find(sets.begin(), sets.end(), r.feature_set) == sets.end()) {
      sets.push_back(r.feature_set);
    }
  }
  SummaryTable table;
  for (auto fs : sets) {
    std::vector<const IterationResult*> results;
    for (const auto& r : records) {
      if (r.feature_set == fs) results.push_back(&r.result);
    }
    const std::size_t pool_size = results.front()->members.size();
    for (const auto* r : results) {
      if (r->members.size() != pool_size) {
        throw DataError(DataErrorCode::Validation,
                        "iteration results disagree on the classifier pool");
      }
    }

    auto make_row = [&](std::string name, auto metric_of, std::size_t top3) {
      std::vector<double> f1, acc;
      for (const auto* r : results) {
        const Metrics& m = metric_of(*r);
        f1.push_back(m.f1);
        acc.push_back(m.accuracy);
      }
      table.rows.push_back(
          {fs, std::move(name), summarize(f1), summarize(acc), top3, results.size()});
    };

    make_row(std::string(kEnsembleName),
             [](const IterationResult& r) -> const Metrics& { return r.mve_metrics; },
             results.size());
    for (std::size_t i = 0; i < pool_size; ++i) {
      std::size_t top3 = 0;
      for (const auto* r : results) top3 += r->ranking.in_top3(i);
      make_row(
          results.front()->members[i].member.name,
          [i](const IterationResult& r) -> const Metrics& {
            return r.members[i].test_metrics;
          },
          top3);
    }
  }
  return table;
}

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<IterationRecord> records;  // iteration-major, then feature set
  SummaryTable summary;
};

inline std::vector<LayerRecord> load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.data_path) return load_dataset(*cfg.data_path);
  return generate_benchmark(cfg.generator, cfg.root_seed, cfg.threads);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::vector<LayerRecord>& records) {
  cfg.validate();
  std::vector<FeatureMatrix> matrices;
  for (auto fs : cfg.feature_sets) {
    matrices.push_back(with_context("feature set " + std::string(to_string(fs)), [&] {
      return build_matrix(records, fs, cfg.threads);
    }));
  }
  const auto layer_labels = labels_of(records);

  const std::size_t n_sets = cfg.feature_sets.size();
  ExperimentResult out;
  out.config = cfg;
  out.records.resize(cfg.iterations * n_sets);
  parallel_for(out.records.size(), cfg.threads, [&](std::size_t task) {
    const std::size_t it = task / n_sets;
    const std::size_t s = task % n_sets;
    const auto seed = derive_seed(cfg.root_seed, "iteration", it);
    const auto context = "iteration " + std::to_string(it) + ", feature set " +
                         std::string(to_string(cfg.feature_sets[s]));

    FrameworkConfig fc;
    fc.pool = cfg.pool;
    fc.k = cfg.k;
    fc.test_fraction = cfg.test_fraction;
    fc.cost_sensitive = cfg.mode == ExperimentMode::CostSensitive;
    fc.features = cfg.feature_sets[s];
    fc.seed = seed;
    fc.train = cfg.train;

    auto& rec = out.records[task];
    rec.iteration = it;
    rec.feature_set = cfg.feature_sets[s];
    rec.result = with_context(context, [&] {
      if (cfg.mode == ExperimentMode::Undersampled) {
        const auto keep = undersample_indices(layer_labels, derive_seed(seed, "undersample"));
        return run_framework(matrices[s].subset(keep), fc);
      }
      return run_framework(matrices[s], fc);
    });
  });
  out.summary = summarize(out.records);
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, load_experiment_data(cfg));
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { Csv, Json, Both };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "both") return ReportFormat::Both;
  throw ConfigError("unknown report format '" + std::string(s) + "'");
}

inline constexpr int kReportFormatVersion = 1;

namespace report {

inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kIterationsFile = "iterations.csv";
inline constexpr const char* kFoldsFile = "folds.csv";
inline constexpr const char* kPlotDataFile = "plotdata.csv";
inline constexpr const char* kJsonFile = "report.json";

// One test-set result: an individual classifier or the ensemble.
struct IterationRow {
  std::size_t iteration = 0;
  std::string feature_set;
  std::uint64_t seed = 0;
  std::string classifier;
  Metrics metrics;
  std::optional<double> cv_mean_f1;  // unset for the ensemble
  bool in_top3 = false;
};

inline std::vector<IterationRow> iteration_rows(const ExperimentResult& res) {
  std::vector<IterationRow> rows;
  for (const auto& rec : res.records) {
    const auto& r = rec.result;
    const std::string fs(to_string(rec.feature_set));
    rows.push_back({rec.iteration, fs, r.seed, std::string(kEnsembleName), r.mve_metrics,
                    std::nullopt, false});
    for (std::size_t i = 0; i < r.members.size(); ++i) {
      const auto& m = r.members[i];
      rows.push_back({rec.iteration, fs, r.seed, m.member.name, m.test_metrics,
                      m.cv.mean_f1, r.ranking.in_top3(i)});
    }
  }
  return rows;
}

inline std::string summary_csv(const SummaryTable& t) {
  std::ostringstream os;
  os << "feature_set,classifier,mean_f1,std_f1,mean_acc,std_acc,top3_count,iterations,"
        "std_defined\n";
  for (const auto& r : t.rows) {
    os << to_string(r.feature_set) << ',' << r.classifier << ',' << format_double(r.f1.mean)
       << ',' << format_double(r.f1.std) << ',' << format_double(r.accuracy.mean) << ','
       << format_double(r.accuracy.std) << ',' << r.top3_count << ',' << r.iterations << ','
       << (r.f1.std_defined ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string iterations_csv(const std::vector<IterationRow>& rows) {
  std::ostringstream os;
  os << "iteration,feature_set,seed,classifier,precision,recall,f1,accuracy,cv_mean_f1,"
        "in_top3\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.feature_set << ',' << r.seed << ',' << r.classifier << ','
       << format_double(r.metrics.precision) << ',' << format_double(r.metrics.recall) << ','
       << format_double(r.metrics.f1) << ',' << format_double(r.metrics.accuracy) << ','
       << (r.cv_mean_f1 ? format_double(*r.cv_mean_f1) : std::string()) << ','
       << (r.in_top3 ? 1 : 0) << '\n';
  }
  return os.str();
}

// Long format for external charting.
inline std::string plotdata_csv(const std::vector<IterationRow>& rows) {
  std::ostringstream os;
  os << "iteration,feature_set,classifier,f1\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.feature_set << ',' << r.classifier << ','
       << format_double(r.metrics.f1) << '\n';
  }
  return os.str();
}

inline std::string folds_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os << "iteration,fold,classifier,feature_set,precision,recall,f1,accuracy\n";
  for (const auto& rec : res.records) {
    for (const auto& m : rec.result.members) {
      for (std::size_t f = 0; f < m.cv.folds.size(); ++f) {
        const auto& fm = m.cv.folds[f];
        os << rec.iteration << ',' << f << ',' << m.member.name << ','
           << to_string(rec.feature_set) << ',' << format_double(fm.precision) << ','
           << format_double(fm.recall) << ',' << format_double(fm.f1) << ','
           << format_double(fm.accuracy) << '\n';
      }
    }
  }
  return os.str();
}

inline nlohmann::json metrics_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"accuracy", m.accuracy}};
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>(), j.at("accuracy").get<double>()};
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json sets = json::array();
  for (auto fs : c.feature_sets) sets.push_back(to_string(fs));
  json pool = json::array();
  for (const auto& p : c.pool) pool.push_back({{"name", p.name}, {"kind", to_string(p.kind)}});
  json source;
  if (c.data_path) {
    source = {{"type", "directory"}, {"path", c.data_path->generic_string()}};
  } else {
    const auto& g = c.generator;
    source = {{"type", "synthetic"},
              {"total_layers", g.total_layers},
              {"block_lengths", g.block_lengths},
              {"bulk_signal_length_range", {g.bulk_signal_length_range.lo,
                                            g.bulk_signal_length_range.hi}},
              {"block_signal_length_range", {g.block_signal_length_range.lo,
                                             g.block_signal_length_range.hi}},
              {"log_location", g.nominal_distribution.log_location},
              {"log_scale", g.nominal_distribution.log_scale},
              {"layer_location_jitter", g.nominal_distribution.layer_location_jitter},
              {"layer_scale_jitter", g.nominal_distribution.layer_scale_jitter},
              {"block_location_offset", g.nominal_distribution.block_location_offset},
              {"spatter_layer_probability", g.nominal_distribution.spatter_layer_probability},
              {"spatter_fraction", g.nominal_distribution.spatter_fraction},
              {"spatter_gain", g.nominal_distribution.spatter_gain},
              {"anomaly_tail_fraction", g.anomaly_tail_fraction},
              {"anomaly_shift", g.anomaly_shift}};
  }
  return {{"root_seed", c.root_seed},
          {"iterations", c.iterations},
          {"k", c.k},
          {"test_fraction", c.test_fraction},
          {"mode", to_string(c.mode)},
          {"feature_sets", std::move(sets)},
          {"pool", std::move(pool)},
          {"dataset", std::move(source)},
          {"hyperparameters", detail::config_json(c.train)}};
}

inline nlohmann::json summary_json(const SummaryTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"feature_set", to_string(r.feature_set)},
                    {"classifier", r.classifier},
                    {"mean_f1", r.f1.mean},
                    {"std_f1", r.f1.std},
                    {"mean_acc", r.accuracy.mean},
                    {"std_acc", r.accuracy.std},
                    {"top3_count", r.top3_count},
                    {"iterations", r.iterations},
                    {"std_defined", r.f1.std_defined}});
  }
  return rows;
}

inline SummaryTable summary_from_json(const nlohmann::json& rows) {
  SummaryTable t;
  for (const auto& j : rows) {
    SummaryRow r;
    r.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
    r.classifier = j.at("classifier").get<std::string>();
    const bool defined = j.at("std_defined").get<bool>();
    r.f1 = {j.at("mean_f1").get<double>(), j.at("std_f1").get<double>(), defined};
    r.accuracy = {j.at("mean_acc").get<double>(), j.at("std_acc").get<double>(), defined};
    r.top3_count = j.at("top3_count").get<std::size_t>();
    r.iterations = j.at("iterations").get<std::size_t>();
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline nlohmann::json report_json(const ExperimentResult& res) {
  using nlohmann::json;
  json iterations = json::array();
  for (const auto& rec : res.records) {
    const auto& r = rec.result;
    json ranking = json::array();
    for (const auto& s : r.ranking.order) {
      ranking.push_back({{"classifier", r.members[s.member].member.name},
                         {"cv_mean_f1", s.mean_f1},
                         {"cv_mean_accuracy", s.mean_accuracy}});
    }
    json top3 = json::array();
    for (auto i : r.ranking.top3) top3.push_back(r.members[i].member.name);
    json members = json::array();
    for (const auto& m : r.members) {
      json folds = json::array();
      for (const auto& f : m.cv.folds) folds.push_back(metrics_json(f));
      members.push_back({{"classifier", m.member.name},
                         {"test", metrics_json(m.test_metrics)},
                         {"cv_mean_f1", m.cv.mean_f1},
                         {"cv_mean_accuracy", m.cv.mean_accuracy},
                         {"cv_folds", std::move(folds)}});
    }
    iterations.push_back({{"iteration", rec.iteration},
                          {"feature_set", to_string(rec.feature_set)},
                          {"seed", r.seed},
                          {"test_size", r.split.test.size()},
                          {"ranking", std::move(ranking)},
                          {"top3", std::move(top3)},
                          {"mve", metrics_json(r.mve_metrics)},
                          {"classifiers", std::move(members)}});
  }
  return {{"format_version", kReportFormatVersion},
          {"config", config_json(res.config)},
          {"iterations", std::move(iterations)},
          {"summary", summary_json(res.summary)}};
}

inline std::vector<IterationRow> iteration_rows_from_json(const nlohmann::json& doc) {
  std::vector<IterationRow> rows;
  for (const auto& it : doc.at("iterations")) {
    const auto iteration = it.at("iteration").get<std::size_t>();
    const auto fs = it.at("feature_set").get<std::string>();
    const auto seed = it.at("seed").get<std::uint64_t>();
    const auto top3 = it.at("top3").get<std::vector<std::string>>();
    rows.push_back({iteration, fs, seed, std::string(kEnsembleName),
                    metrics_from_json(it.at("mve")), std::nullopt, false});
    for (const auto& m : it.at("classifiers")) {
      const auto name = m.at("classifier").get<std::string>();
      rows.push_back({iteration, fs, seed, name, metrics_from_json(m.at("test")),
                      m.at("cv_mean_f1").get<double>(),
                      std::find(top3.begin(), top3.end(), name) != top3.end()});
    }
  }
  return rows;
}

// Parses summary.csv as written by summary_csv().
inline SummaryTable summary_from_csv(std::istream& in) {
  SummaryTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 9) {
      throw DataError(DataErrorCode::MalformedRow,
                      "summary line " + std::to_string(line_no) + ": expected 9 columns");
    }
    auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError(DataErrorCode::MalformedRow,
                        "summary line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    SummaryRow r;
    r.feature_set = parse_feature_set(cells[0]);
    r.classifier = cells[1];
    const bool defined = cells[8] == "1";
    r.f1 = {num(cells[2]), num(cells[3]), defined};
    r.accuracy = {num(cells[4]), num(cells[5]), defined};
    r.top3_count = static_cast<std::size_t>(num(cells[6]));
    r.iterations = static_cast<std::size_t>(num(cells[7]));
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + file.string());
}

}  // namespace report

inline void emit_report(const ExperimentResult& res, const std::filesystem::path& dir,
                        ReportFormat format) {
  if (res.summary.rows.empty() || res.config.feature_sets.empty()) {
    throw ConfigError("nothing to report: no feature set was run");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory " + dir.string());
  }
  if (format != ReportFormat::Json) {
    const auto rows = report::iteration_rows(res);
    report::write_text(dir / report::kSummaryFile, report::summary_csv(res.summary));
    report::write_text(dir / report::kIterationsFile, report::iterations_csv(rows));
    report::write_text(dir / report::kFoldsFile, report::folds_csv(res));
    report::write_text(dir / report::kPlotDataFile, report::plotdata_csv(rows));
  }
  if (format != ReportFormat::Csv) {
    report::write_text(dir / report::kJsonFile, report::report_json(res).dump(2) + "\n");
  }
}

// Console table. Pool members that never made the top three are left out;
// the CSV/JSON keep them.
inline std::string render_summary(const SummaryTable& t) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-10s %9s %9s %9s %9s\n", "Dataset", "Classifier",
                "F1 mean", "F1 std", "Acc mean", "Acc std");
  os << line;
  for (const auto& r : t.rows) {
    if (r.classifier != kEnsembleName && r.top3_count == 0) continue;
    std::string fs(to_string(r.feature_set));
    std::transform(fs.begin(), fs.end(), fs.begin(), ::toupper);
    std::snprintf(line, sizeof(line), "%-8s %-10s %9.4f %9.4f %9.4f %9.4f\n", fs.c_str(),
                  r.classifier.c_str(), r.f1.mean, r.f1.std, r.accuracy.mean, r.accuracy.std);
    os << line;
  }
  return os.str();
}

}  // namespace overheat
