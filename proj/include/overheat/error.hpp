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

#include <stdexcept>
#include <string>

namespace overheat {

// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind { Config, Data, Numerical };

// Finer classification for data errors so callers (and tests) can tell a
// missing file from a malformed row without parsing messages.
enum class DataErrorCode {
  Validation,
  MissingFile,
  MalformedRow,
  InvalidSample,
  CountMismatch,
  InsufficientData,
  DimensionMismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  DataError(DataErrorCode code, const std::string& what)
      : Error(ErrorKind::Data, what), code_(code) {}

  DataErrorCode code() const noexcept { return code_; }

 private:
  DataErrorCode code_;
};

// Raised when an iterative solver gives up. `residual` carries the last
// measured optimality violation.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(ErrorKind::Numerical, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Wraps a lower-level error with pipeline context while keeping its kind.
template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(e.code(), context + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what(), e.residual());
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  }
}

}  // namespace overheat
