// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_COMMON_ERROR_HPP
#define XLB_COMMON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace xlb {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (sizes, ranges, infeasible specs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes that do not line up.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

class IndexError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates the data model (unknown label, length mismatch).
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Duplicate keys in a lexicon file.
class ConflictError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Non-finite values or loss blow-ups.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Batch planning could not satisfy the balance constraints.
class PlanningError : public Error {
 public:
  using Error::Error;
};

/// A requested method needs an input that was not provided (e.g. a lexicon).
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

/// A file the command depends on (checkpoint, report) does not exist.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

/// Graph construction inputs are inconsistent.
class GraphError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace xlb

#endif  // XLB_COMMON_ERROR_HPP
