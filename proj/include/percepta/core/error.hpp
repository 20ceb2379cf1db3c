// Copyright 2026 The Percepta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace percepta {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kConfig,      ///< bad or inconsistent configuration
  kInput,       ///< caller passed malformed arguments (shapes, lengths)
  kFormat,      ///< on-disk file does not follow its format
  kData,        ///< file is well-formed but holds unusable values
  kIngestion,   ///< corpus layout problem
  kDegenerate,  ///< input is valid but carries no usable signal
  kNumerical,   ///< NaN/Inf or divergence during computation
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kIngestion: return "ingestion error";
    case ErrorKind::kDegenerate: return "degenerate-input error";
    case ErrorKind::kNumerical: return "numerical error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::kInput, what) {}
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(ErrorKind::kFormat, what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  explicit FormatError(const std::string& what) : Error(ErrorKind::kFormat, what) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_ = 0;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string& what) : Error(ErrorKind::kIngestion, what) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::kDegenerate, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

/// Raised when autoencoder training produces a non-finite loss.
class TrainingError : public NumericalError {
 public:
  TrainingError(const std::string& what, std::int64_t step)
      : NumericalError(what + " at step " + std::to_string(step)), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

/// Throws the subclass matching `kind`.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::kConfig: throw ConfigError(what);
    case ErrorKind::kInput: throw InputError(what);
    case ErrorKind::kFormat: throw FormatError(what);
    case ErrorKind::kData: throw DataError(what);
    case ErrorKind::kIngestion: throw IngestionError(what);
    case ErrorKind::kDegenerate: throw DegenerateInputError(what);
    case ErrorKind::kNumerical: throw NumericalError(what);
  }
  throw Error(kind, what);
}

/// Rethrows `e` as the same kind with `context` prepended.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  throw_error(e.kind(), context + ": " + e.message());
}

}  // namespace percepta
