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
#include <charconv>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "overheat/error.hpp"

namespace overheat {

enum class ClassLabel : unsigned char { Nominal = 0, Anomalous = 1 };
enum class LayerType : unsigned char { Bulk = 0, UnexposedBlock = 1 };

inline constexpr std::size_t kNumClasses = 2;

constexpr std::size_t class_index(ClassLabel c) noexcept {
  return static_cast<std::size_t>(c);
}

constexpr ClassLabel flip(ClassLabel c) noexcept {
  return c == ClassLabel::Anomalous ? ClassLabel::Nominal
                                    : ClassLabel::Anomalous;
}

inline std::string_view to_string(ClassLabel c) {
  return c == ClassLabel::Anomalous ? "anomalous" : "nominal";
}

inline std::string_view to_string(LayerType t) {
  return t == LayerType::UnexposedBlock ? "unexposed_block" : "bulk";
}

inline ClassLabel parse_class_label(std::string_view s) {
  if (s == "nominal") return ClassLabel::Nominal;
  if (s == "anomalous") return ClassLabel::Anomalous;
  throw DataError(DataErrorCode::MalformedRow,
                  "unknown class label '" + std::string(s) + "'");
}

inline LayerType parse_layer_type(std::string_view s) {
  if (s == "bulk") return LayerType::Bulk;
  if (s == "unexposed_block") return LayerType::UnexposedBlock;
  throw DataError(DataErrorCode::MalformedRow,
                  "unknown layer type '" + std::string(s) + "'");
}

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> values() const noexcept { return data_; }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) {
      throw DataError(DataErrorCode::DimensionMismatch,
                      "row width " + std::to_string(values.size()) +
                          " does not match matrix width " +
                          std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  Matrix select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = row(indices[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

template <typename T>
std::vector<T> select(std::span<const T> values,
                      std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(values[i]);
  return out;
}

}  // namespace overheat
