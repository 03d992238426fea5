#pragma once

#include <stdexcept>
#include <string>

namespace spreadmon {

/// Bad caller-supplied value (gamma out of range, negative threshold, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Prior specification violates its invariants (non-PD P1, n1 <= 0, d1 <= 0).
class InvalidPriorError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Posterior covariance lost positive semidefiniteness beyond tolerance.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FLS normal equation has a zero pivot (S + p2^2 == 0).
class DegenerateRegressorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagnostic was asked for on an empty (or fully skipped) record set.
class EmptyInputError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A step record carries values a diagnostic cannot score (e.g. Q*S <= 0).
class InvalidRecordError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// File-level ingestion failures, one kind per distinct CLI exit code.
class IoError : public std::runtime_error {
 public:
  enum class Kind { missing_file, bad_header, empty_body };

  IoError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace spreadmon
