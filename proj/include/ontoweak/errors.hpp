#pragma once

#include <stdexcept>
#include <string>

namespace ontoweak {

// Categories line up with the process exit codes used by the CLI and the
// status codes returned by the C API.
enum class ErrorKind {
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::kData, "dimension error: " + what) {}
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorKind::kConfig, "parameter error: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, "config error: " + what) {}
};

/// Ontology or label data violates the structural contract.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what)
      : Error(ErrorKind::kData, "schema error: " + what) {}
};

/// A file is readable but not in the expected layout.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kData, "format error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what)
      : Error(ErrorKind::kData, "io error: " + what) {}
};

/// Non-finite values during training or a failed gradient check.
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what)
      : Error(ErrorKind::kNumeric, "training error: " + what) {}
};

}  // namespace ontoweak
