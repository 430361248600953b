// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dysflux {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value outside the domain of a function (e.g. a probability of 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (hyperparameters, class weights, flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Manifest or record invariants violated. `issues()` lists each offender,
/// prefixed with its source line when known.
class ValidationError : public Error {
 public:
  using Error::Error;
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = std::to_string(issues.size()) + " validation issue(s)";
    for (const auto& issue : issues) out += "\n  " + issue;
    return out;
  }
  std::vector<std::string> issues_;
};

/// Inconsistent input data (e.g. more votes than annotators).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary or JSON file. `field()` names the offending header field.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Calling an operation in the wrong order (backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// The finite-difference oracle could not evaluate its function.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Merging manifests with colliding clip ids or incompatible composition.
class MergeError : public Error {
 public:
  using Error::Error;
};

/// Warm-starting from a checkpoint with incompatible dimensions.
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace dysflux
