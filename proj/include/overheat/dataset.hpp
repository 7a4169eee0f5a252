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

// Per-layer photodiode datasets: labeling from the unexposed-block layout,
// a seeded synthetic benchmark generator, the on-disk directory format, and
// the balanced undersampling used by the undersampling baseline.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "overheat/error.hpp"
#include "overheat/parallel.hpp"
#include "overheat/random.hpp"
#include "overheat/types.hpp"

namespace overheat {

// Number of bulk layers after an unexposed block that overheat.
inline constexpr std::size_t kOverheatedLayersPerBlock = 3;

struct LayerRecord {
  std::size_t layer_index = 0;
  std::vector<double> samples;
  LayerType layer_type = LayerType::Bulk;
  ClassLabel class_label = ClassLabel::Nominal;

  void validate() const {
    const auto where = "layer " + std::to_string(layer_index);
    if (samples.empty()) {
      throw DataError(DataErrorCode::Validation, where + ": empty signal");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!std::isfinite(samples[i]) || samples[i] < 0.0) {
        throw DataError(DataErrorCode::InvalidSample,
                        where + ": sample " + std::to_string(i) +
                            " is negative or non-finite");
      }
    }
    if (layer_type == LayerType::UnexposedBlock &&
        class_label != ClassLabel::Nominal) {
      throw DataError(DataErrorCode::Validation,
                      where + ": unexposed block layers must be nominal");
    }
  }

  friend bool operator==(const LayerRecord&, const LayerRecord&) = default;
};

struct LayerLabel {
  LayerType layer_type = LayerType::Bulk;
  ClassLabel class_label = ClassLabel::Nominal;
  friend bool operator==(const LayerLabel&, const LayerLabel&) = default;
};

struct BlockLayout {
  struct Block {
    std::size_t start = 0;
    std::size_t length = 0;
  };

  std::vector<Block> blocks;
  std::size_t total_layers = 0;

  void validate() const {
    std::size_t prev_end = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& blk = blocks[b];
      const auto name = "block " + std::to_string(b) + " (start " +
                        std::to_string(blk.start) + ", length " +
                        std::to_string(blk.length) + ")";
      if (blk.length == 0) {
        throw DataError(DataErrorCode::Validation, name + " is empty");
      }
      if (b > 0 && blk.start < prev_end) {
        throw DataError(DataErrorCode::Validation,
                        name + " overlaps or precedes the previous block");
      }
      const auto end = blk.start + blk.length;
      if (end > total_layers) {
        throw DataError(DataErrorCode::Validation,
                        name + " extends past the last layer");
      }
      if (blk.length >= 2) {
        const auto tail_end = end + kOverheatedLayersPerBlock;
        if (tail_end > total_layers) {
          throw DataError(DataErrorCode::Validation,
                          name + ": overheated layers extend past the build");
        }
        if (b + 1 < blocks.size() && blocks[b + 1].start < tail_end) {
          throw DataError(DataErrorCode::Validation,
                          name + ": overheated layers run into the next block");
        }
      }
      prev_end = end;
    }
  }
};

// Places blocks in the given order, spreading the bulk layers evenly: every
// block is followed by the same gap and the remainder goes before the first
// block.
inline BlockLayout default_layout(const std::vector<std::size_t>& block_lengths,
                                  std::size_t total_layers) {
  const std::size_t unexposed =
      std::accumulate(block_lengths.begin(), block_lengths.end(), std::size_t{0});
  if (unexposed > total_layers) {
    throw ConfigError("unexposed layers (" + std::to_string(unexposed) +
                      ") exceed total layers (" + std::to_string(total_layers) +
                      ")");
  }
  BlockLayout layout;
  layout.total_layers = total_layers;
  if (block_lengths.empty()) return layout;

  const std::size_t bulk = total_layers - unexposed;
  const std::size_t gap = bulk / (block_lengths.size() + 1);
  if (gap < kOverheatedLayersPerBlock) {
    throw ConfigError("not enough bulk layers to separate " +
                      std::to_string(block_lengths.size()) + " blocks");
  }
  std::size_t cursor = bulk - gap * block_lengths.size();
  for (auto len : block_lengths) {
    layout.blocks.push_back({cursor, len});
    cursor += len + gap;
  }
  layout.validate();
  return layout;
}

inline std::vector<LayerLabel> derive_labels(const BlockLayout& layout) {
  layout.validate();
  std::vector<LayerLabel> labels(layout.total_layers);
  for (const auto& blk : layout.blocks) {
    for (std::size_t i = blk.start; i < blk.start + blk.length; ++i) {
      labels[i] = {LayerType::UnexposedBlock, ClassLabel::Nominal};
    }
    // A single unexposed layer is remelted away and leaves no overhang.
    if (blk.length < 2) continue;
    const auto end = blk.start + blk.length;
    for (std::size_t i = end; i < end + kOverheatedLayersPerBlock; ++i) {
      labels[i] = {LayerType::Bulk, ClassLabel::Anomalous};
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

// Log-normal per-sample intensity. Each layer draws its own log-location and
// log-scale around the base values, which is what makes mean/std alone a
// weak separator between classes. Some layers, of either class, also carry
// short spatter bursts: a small fraction of samples boosted by
// exp(spatter_gain), which mostly disturbs max and std.
struct IntensityDistribution {
  double log_location = 6.0;
  double log_scale = 0.30;
  double layer_location_jitter = 0.01;
  double layer_scale_jitter = 0.10;
  double block_location_offset = 0.12;
  double spatter_layer_probability = 0.4;
  double spatter_fraction = 0.002;
  double spatter_gain = 1.5;
};

struct GeneratorConfig {
  std::size_t total_layers = 379;
  std::vector<std::size_t> block_lengths{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  IntRange bulk_signal_length_range{30339, 31135};
  IntRange block_signal_length_range{9560, 9726};
  IntensityDistribution nominal_distribution;
  double anomaly_tail_fraction = 0.10;
  double anomaly_shift = 0.45;

  void validate() const {
    auto check_range = [](const IntRange& r, const char* name) {
      if (r.lo <= 0 || r.hi < r.lo) {
        throw ConfigError(std::string(name) +
                          " must be a non-empty range of positive lengths");
      }
    };
    check_range(bulk_signal_length_range, "bulk_signal_length_range");
    check_range(block_signal_length_range, "block_signal_length_range");
    if (!(anomaly_tail_fraction > 0.0 && anomaly_tail_fraction < 1.0)) {
      throw ConfigError("anomaly_tail_fraction must lie in (0, 1)");
    }
    if (!std::isfinite(anomaly_shift)) {
      throw ConfigError("anomaly_shift must be finite");
    }
    const auto& d = nominal_distribution;
    if (!(d.log_scale > 0.0) || !std::isfinite(d.log_location) ||
        !(d.layer_location_jitter >= 0.0) || !(d.layer_scale_jitter >= 0.0) ||
        !std::isfinite(d.block_location_offset) ||
        !(d.spatter_layer_probability >= 0.0 && d.spatter_layer_probability <= 1.0) ||
        !(d.spatter_fraction >= 0.0 && d.spatter_fraction <= 1.0) ||
        !std::isfinite(d.spatter_gain)) {
      throw ConfigError("invalid nominal intensity distribution");
    }
    if (total_layers == 0) throw ConfigError("total_layers must be positive");
  }

  std::size_t unexposed_layers() const {
    return std::accumulate(block_lengths.begin(), block_lengths.end(),
                           std::size_t{0});
  }
};

// Draws one layer's signal. The mixture indicator is consumed for every
// sample, anomalous or not, so a nominal and an anomalous layer drawn from
// the same stream differ only where the indicator selects the shifted
// component.
inline std::vector<double> sample_layer_signal(const GeneratorConfig& cfg,
                                               LayerLabel label,
                                               std::size_t length, Rng& rng) {
  const auto& d = cfg.nominal_distribution;
  double location = d.log_location + d.layer_location_jitter * rng.normal();
  if (label.layer_type == LayerType::UnexposedBlock) {
    location += d.block_location_offset;
  }
  const double scale = d.log_scale * std::exp(d.layer_scale_jitter * rng.normal());
  const bool spattered = rng.uniform01() < d.spatter_layer_probability;
  const bool anomalous = label.class_label == ClassLabel::Anomalous;

  std::vector<double> samples(length);
  for (auto& s : samples) {
    const bool elevated = rng.uniform01() < cfg.anomaly_tail_fraction;
    const bool burst = rng.uniform01() < d.spatter_fraction;
    const double z = rng.normal();
    double shift = (anomalous && elevated) ? cfg.anomaly_shift : 0.0;
    if (spattered && burst) shift += d.spatter_gain;
    s = std::exp(location + scale * z + shift);
  }
  return samples;
}

inline std::vector<LayerRecord> generate_benchmark(const GeneratorConfig& cfg,
                                                   std::uint64_t seed,
                                                   unsigned threads = 0) {
  cfg.validate();
  const auto layout = default_layout(cfg.block_lengths, cfg.total_layers);
  const auto labels = derive_labels(layout);

  std::vector<LayerRecord> records(cfg.total_layers);
  parallel_for(cfg.total_layers, threads, [&](std::size_t i) {
    const auto& range = labels[i].layer_type == LayerType::UnexposedBlock
                            ? cfg.block_signal_length_range
                            : cfg.bulk_signal_length_range;
    Rng length_rng(derive_seed(seed, "layer-length", i));
    const auto length =
        static_cast<std::size_t>(length_rng.uniform_int(range.lo, range.hi));
    Rng signal_rng(derive_seed(seed, "layer-signal", i));

    auto& rec = records[i];
    rec.layer_index = i;
    rec.layer_type = labels[i].layer_type;
    rec.class_label = labels[i].class_label;
    rec.samples = sample_layer_signal(cfg, labels[i], length, signal_rng);
  });
  return records;
}

// ---------------------------------------------------------------------------
// Directory format: manifest.json plus one text file per layer.

inline std::string signal_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "layer_%04zu.txt", index);
  return buf;
}

inline void save_dataset(const std::vector<LayerRecord>& records,
                         const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create dataset directory " + dir.string() + ": " +
                      ec.message());
  }

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& rec : records) {
    rec.validate();
    const auto file = signal_file_name(rec.layer_index);
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir / file).string());
    std::string buf;
    buf.reserve(rec.samples.size() * 20);
    for (double v : rec.samples) {
      buf += format_double(v);
      buf += '\n';
    }
    out << buf;
    layers.push_back({{"index", rec.layer_index},
                      {"file", file},
                      {"layer_type", to_string(rec.layer_type)},
                      {"class_label", to_string(rec.class_label)}});
  }

  nlohmann::json manifest = {{"format_version", 1},
                             {"layer_count", records.size()},
                             {"layers", std::move(layers)}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

inline std::vector<double> read_signal_file(const std::filesystem::path& file,
                                            const std::string& layer_name) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw DataError(DataErrorCode::MissingFile,
                    layer_name + ": signal file " + file.string() + " is missing");
  }
  std::vector<double> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto where = layer_name + ": " + file.string() + " line " +
                       std::to_string(line_no);
    if (line.empty()) {
      throw DataError(DataErrorCode::MalformedRow, where + ": empty row");
    }
    double v = 0.0;
    const auto* first = line.data();
    const auto* last = line.data() + line.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw DataError(DataErrorCode::MalformedRow,
                      where + ": cannot parse '" + line + "'");
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw DataError(DataErrorCode::InvalidSample,
                      where + ": sample '" + line +
                          "' is negative or non-finite");
    }
    samples.push_back(v);
  }
  if (samples.empty()) {
    throw DataError(DataErrorCode::Validation,
                    layer_name + ": " + file.string() + " holds no samples");
  }
  return samples;
}

inline std::vector<LayerRecord> load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw DataError(DataErrorCode::MissingFile,
                    "manifest " + manifest_path.string() + " is missing");
  }
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorCode::MalformedRow,
                    "manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("layers") ||
      !manifest["layers"].is_array()) {
    throw DataError(DataErrorCode::MalformedRow,
                    "manifest " + manifest_path.string() +
                        " has no 'layers' array");
  }
  const auto& layers = manifest["layers"];
  if (manifest.contains("layer_count") &&
      manifest["layer_count"].get<std::size_t>() != layers.size()) {
    throw DataError(DataErrorCode::CountMismatch,
                    "manifest declares " +
                        std::to_string(manifest["layer_count"].get<std::size_t>()) +
                        " layers but lists " + std::to_string(layers.size()));
  }

  std::vector<LayerRecord> records;
  records.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& entry = layers[i];
    LayerRecord rec;
    std::string file;
    try {
      rec.layer_index = entry.at("index").get<std::size_t>();
      file = entry.at("file").get<std::string>();
      rec.layer_type = parse_layer_type(entry.at("layer_type").get<std::string>());
      rec.class_label =
          parse_class_label(entry.at("class_label").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataErrorCode::MalformedRow,
                      "manifest entry " + std::to_string(i) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(e.code(),
                      "manifest entry " + std::to_string(i) + ": " + e.what());
    }
    const auto name = "layer " + std::to_string(rec.layer_index);
    rec.samples = read_signal_file(dir / file, name);
    rec.validate();
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Undersampling baseline

// Indices (ascending) of every anomalous record plus an equal-sized random
// subset of bulk nominal records. Unexposed block layers are dropped.
inline std::vector<std::size_t> undersample_indices(
    std::span<const LayerLabel> labels, std::uint64_t seed) {
  std::vector<std::size_t> anomalous;
  std::vector<std::size_t> bulk_nominal;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].class_label == ClassLabel::Anomalous) {
      anomalous.push_back(i);
    } else if (labels[i].layer_type == LayerType::Bulk) {
      bulk_nominal.push_back(i);
    }
  }
  if (bulk_nominal.size() < anomalous.size()) {
    throw DataError(DataErrorCode::InsufficientData,
                    "undersampling needs at least " +
                        std::to_string(anomalous.size()) +
                        " bulk nominal layers, found " +
                        std::to_string(bulk_nominal.size()));
  }
  Rng rng(derive_seed(seed, "undersample"));
  rng.shuffle(std::span<std::size_t>(bulk_nominal));
  std::vector<std::size_t> out = anomalous;
  out.insert(out.end(), bulk_nominal.begin(),
             bulk_nominal.begin() + static_cast<std::ptrdiff_t>(anomalous.size()));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<LayerLabel> labels_of(const std::vector<LayerRecord>& records) {
  std::vector<LayerLabel> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.layer_type, r.class_label});
  return out;
}

inline std::vector<LayerRecord> undersample_nominal(
    const std::vector<LayerRecord>& records, std::uint64_t seed) {
  const auto labels = labels_of(records);
  std::vector<LayerRecord> out;
  for (auto i : undersample_indices(labels, seed)) out.push_back(records[i]);
  return out;
}

}  // namespace overheat
