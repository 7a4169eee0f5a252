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

// Command-line front end: generate, extract, run, report, train, predict.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "overheat/overheat.hpp"

namespace fs = std::filesystem;
using namespace overheat;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<FeatureSetKind> parse_feature_list(const std::string& list) {
  if (list == "all") return {std::begin(kAllFeatureSets), std::end(kAllFeatureSets)};
  std::vector<FeatureSetKind> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto kind = parse_feature_set(item);
    if (std::find(out.begin(), out.end(), kind) != out.end()) {
      throw ConfigError("feature set '" + item + "' listed twice");
    }
    out.push_back(kind);
  }
  if (out.empty()) throw ConfigError("no feature set selected");
  return out;
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError(DataErrorCode::MissingFile, "cannot open " + file.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json read_json(const fs::path& file) {
  try {
    return nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorCode::Validation, file.string() + ": " + e.what());
  }
}

struct GeneratorOptions {
  std::size_t layers = 379;
  std::optional<double> tail_fraction;
  std::optional<double> shift;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--layers", layers, "Number of layers in the build")
        ->capture_default_str();
    cmd->add_option("--tail-fraction", tail_fraction,
                    "Fraction of samples elevated in overheated layers");
    cmd->add_option("--shift", shift, "Log-intensity shift of elevated samples");
  }

  GeneratorConfig config() const {
    GeneratorConfig g;
    g.total_layers = layers;
    if (tail_fraction) g.anomaly_tail_fraction = *tail_fraction;
    if (shift) g.anomaly_shift = *shift;
    return g;
  }
};

int cmd_generate(const fs::path& out, std::uint64_t seed, const GeneratorOptions& opts) {
  const auto cfg = opts.config();
  cfg.validate();
  const auto records = generate_benchmark(cfg, seed);
  save_dataset(records, out);
  std::size_t anomalous = 0;
  for (const auto& r : records) anomalous += r.class_label == ClassLabel::Anomalous;
  std::cout << "wrote " << records.size() << " layers (" << anomalous << " anomalous) to "
            << out.string() << "\n";
  return 0;
}

int cmd_extract(const fs::path& data, const std::string& features, const fs::path& out) {
  const auto kind = parse_feature_set(features);
  const auto records = load_dataset(data);
  write_feature_csv(build_matrix(records, kind, 0), out);
  std::cout << "wrote " << records.size() << " x " << feature_dimension(kind)
            << " feature matrix to " << out.string() << "\n";
  return 0;
}

struct RunOptions {
  std::optional<fs::path> data;
  bool synthetic = false;
  std::string features = "all";
  std::size_t iterations = 100;
  std::size_t kfolds = 5;
  double test_frac = 0.3;
  std::string mode = "cost-sensitive";
  std::uint64_t seed = 0;
  fs::path out;
  std::string format = "both";
  unsigned threads = 0;
  GeneratorOptions generator;
};

int cmd_run(const RunOptions& o) {
  if (o.data.has_value() == o.synthetic) {
    throw ConfigError("exactly one of --data or --synthetic is required");
  }
  ExperimentConfig cfg;
  cfg.data_path = o.data;
  cfg.generator = o.generator.config();
  cfg.feature_sets = parse_feature_list(o.features);
  cfg.iterations = o.iterations;
  cfg.k = o.kfolds;
  cfg.test_fraction = o.test_frac;
  cfg.mode = parse_mode(o.mode);
  cfg.root_seed = o.seed;
  cfg.threads = o.threads;
  const auto format = parse_report_format(o.format);
  cfg.validate();

  const auto result = run_experiment(cfg);
  emit_report(result, o.out, format);
  std::cout << render_summary(result.summary);
  return 0;
}

int cmd_report(const fs::path& in, const std::string& emit) {
  const auto summary_file = in / report::kSummaryFile;
  const auto iterations_file = in / report::kIterationsFile;
  const auto plot_file = in / report::kPlotDataFile;
  const auto json_file = in / report::kJsonFile;
  auto need_json = [&] {
    if (!fs::exists(json_file)) {
      throw DataError(DataErrorCode::MissingFile,
                      "no report found in " + in.string() + " (expected CSV or " +
                          report::kJsonFile + ")");
    }
    return read_json(json_file);
  };

  if (emit == "summary") {
    SummaryTable t;
    if (fs::exists(summary_file)) {
      std::istringstream is(read_file(summary_file));
      t = report::summary_from_csv(is);
    } else {
      t = report::summary_from_json(need_json().at("summary"));
    }
    std::cout << render_summary(t);
  } else if (emit == "per-iteration") {
    if (fs::exists(iterations_file)) {
      std::cout << read_file(iterations_file);
    } else {
      std::cout << report::iterations_csv(report::iteration_rows_from_json(need_json()));
    }
  } else if (emit == "plotdata") {
    if (fs::exists(plot_file)) {
      std::cout << read_file(plot_file);
    } else {
      std::cout << report::plotdata_csv(report::iteration_rows_from_json(need_json()));
    }
  } else {
    throw ConfigError("unknown --emit value '" + emit + "'");
  }
  return 0;
}

int cmd_train(const fs::path& data, const std::string& features,
              const std::string& classifier, bool uniform, std::uint64_t seed,
              const fs::path& out) {
  const auto kind = parse_feature_set(features);
  const auto ck = parse_classifier(classifier);
  const auto m = build_matrix(load_dataset(data), kind, 0);
  const auto weights = uniform ? ClassWeights::uniform() : balanced_weights(m.labels);
  const auto model = train(ck, m.rows, m.labels, weights, TrainConfig{}, seed);
  nlohmann::json doc = {{"feature_set", to_string(kind)}, {"model", model_to_json(model)}};
  report::write_text(out, doc.dump(2) + "\n");
  std::cout << "trained " << to_string(ck) << " on " << m.size() << " layers ("
            << to_string(kind) << "), saved to " << out.string() << "\n";
  return 0;
}

int cmd_predict(const fs::path& data, const fs::path& model_file,
                const std::optional<fs::path>& out) {
  const auto doc = read_json(model_file);
  FeatureSetKind kind;
  TrainedModel model;
  try {
    kind = parse_feature_set(doc.at("feature_set").get<std::string>());
    model = model_from_json(doc.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorCode::Validation, model_file.string() + ": " + e.what());
  }
  const auto m = build_matrix(load_dataset(data), kind, 0);
  const auto pred = predict(model, m.rows);

  std::ostringstream os;
  os << "layer_index,predicted,label\n";
  for (std::size_t i = 0; i < pred.size(); ++i) {
    os << m.layer_indices[i] << ',' << to_string(pred[i]) << ',' << to_string(m.labels[i])
       << '\n';
  }
  if (out) {
    report::write_text(*out, os.str());
    const auto metrics = evaluate(m.labels, pred);
    std::cout << "f1 " << format_double(metrics.f1) << ", accuracy "
              << format_double(metrics.accuracy) << "\n";
  } else {
    std::cout << os.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overheating detection for LPBF photodiode layer signals"};
  app.require_subcommand(1);

  std::function<int()> action;

  auto* gen = app.add_subcommand("generate", "Write a synthetic benchmark dataset");
  fs::path gen_out;
  std::uint64_t gen_seed = 0;
  GeneratorOptions gen_opts;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen_opts.add_to(gen);
  gen->callback([&] { action = [&] { return cmd_generate(gen_out, gen_seed, gen_opts); }; });

  auto* ext = app.add_subcommand("extract", "Export a feature matrix as CSV");
  fs::path ext_data, ext_out;
  std::string ext_features;
  ext->add_option("--data", ext_data, "Dataset directory")->required();
  ext->add_option("--features", ext_features, "msmm, msq or msd")->required();
  ext->add_option("--out", ext_out, "Output CSV file")->required();
  ext->callback([&] { action = [&] { return cmd_extract(ext_data, ext_features, ext_out); }; });

  auto* run = app.add_subcommand("run", "Run the repeated MVE experiment");
  RunOptions ro;
  auto* data_opt = run->add_option("--data", ro.data, "Dataset directory");
  auto* synth_opt = run->add_flag("--synthetic", ro.synthetic,
                                  "Generate the synthetic benchmark from --seed");
  data_opt->excludes(synth_opt);
  run->add_option("--features", ro.features, "Comma list of msmm,msq,msd or 'all'")
      ->capture_default_str();
  run->add_option("--iterations", ro.iterations)->capture_default_str();
  run->add_option("--kfolds", ro.kfolds)->capture_default_str();
  run->add_option("--test-frac", ro.test_frac)->capture_default_str();
  run->add_option("--mode", ro.mode, "cost-sensitive, uniform or undersample")
      ->capture_default_str();
  run->add_option("--seed", ro.seed, "Root seed")->capture_default_str();
  run->add_option("--out", ro.out, "Report directory")->required();
  run->add_option("--format", ro.format, "csv, json or both")->capture_default_str();
  run->add_option("--threads", ro.threads, "Worker threads, 0 for all cores")
      ->capture_default_str();
  ro.generator.add_to(run);
  run->callback([&] { action = [&] { return cmd_run(ro); }; });

  auto* rep = app.add_subcommand("report", "Print a stored report");
  fs::path rep_in;
  std::string rep_emit = "summary";
  rep->add_option("--in", rep_in, "Report directory")->required();
  rep->add_option("--emit", rep_emit, "summary, per-iteration or plotdata")
      ->capture_default_str();
  rep->callback([&] { action = [&] { return cmd_report(rep_in, rep_emit); }; });

  auto* trn = app.add_subcommand("train", "Fit one classifier on a whole dataset");
  fs::path trn_data, trn_out;
  std::string trn_features = "msd", trn_classifier = "RF";
  bool trn_uniform = false;
  std::uint64_t trn_seed = 0;
  trn->add_option("--data", trn_data, "Dataset directory")->required();
  trn->add_option("--features", trn_features)->capture_default_str();
  trn->add_option("--classifier", trn_classifier, "RF, DT, LR or SVC")->capture_default_str();
  trn->add_flag("--uniform", trn_uniform, "Disable cost-sensitive class weights");
  trn->add_option("--seed", trn_seed)->capture_default_str();
  trn->add_option("--out", trn_out, "Model JSON file")->required();
  trn->callback([&] {
    action = [&] {
      return cmd_train(trn_data, trn_features, trn_classifier, trn_uniform, trn_seed, trn_out);
    };
  });

  auto* prd = app.add_subcommand("predict", "Label layers with a saved model");
  fs::path prd_data, prd_model;
  std::optional<fs::path> prd_out;
  prd->add_option("--data", prd_data, "Dataset directory")->required();
  prd->add_option("--model", prd_model, "Model JSON file")->required();
  prd->add_option("--out", prd_out, "Prediction CSV (stdout when omitted)");
  prd->callback([&] { action = [&] { return cmd_predict(prd_data, prd_model, prd_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
