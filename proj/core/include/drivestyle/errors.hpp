// Copyright 2026 The drivestyle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace drivestyle {

/// Broad failure category. Each kind maps onto one CLI exit code.
enum class ErrorKind {
  kValidation,  // bad configuration or arguments
  kSchema,      // input file layout or label mismatch
  kData,        // malformed or inconsistent input values
  kRange,       // value outside its admissible interval
  kNumerical,   // optimizer / rotation / estimator failure
  kInternal,    // broken invariant inside the library
};

const char* to_string(ErrorKind kind);

/// Exit status used by the CLI for errors of this kind.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error(ErrorKind::kValidation, m) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error(ErrorKind::kSchema, m) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error(ErrorKind::kData, m) {}
  DataError(const std::string& m, std::vector<std::size_t> rows)
      : Error(ErrorKind::kData, m), rows_(std::move(rows)) {}

  /// Offending data-row indices (0-based, header excluded), when known.
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& m) : Error(ErrorKind::kRange, m) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& m) : Error(ErrorKind::kNumerical, m) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& m) : Error(ErrorKind::kInternal, m) {}
};

/// Non-fatal conditions collected alongside a result.
using Warnings = std::vector<std::string>;

}  // namespace drivestyle
