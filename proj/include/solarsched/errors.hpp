#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solarsched {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller passed values outside an operation's documented domain
// (negative power, mismatched dimensions, non-finite inputs, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A text input (CSV row, config line) could not be parsed. Carries the
// 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input parsed fine but violates a data-level contract
// (non-monotone timestamps, coverage gaps, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// A resampling window has no (or incomplete) coverage and gap filling
// was not requested.
class GapError : public DataError {
 public:
  using DataError::DataError;
};

// log2 of a zero per-gateway byte total: the proportional-fair utility
// does not exist for this schedule.
class UtilityUndefinedError : public Error {
 public:
  using Error::Error;
};

// Jain's index of an all-zero allocation vector.
class UndefinedFairnessError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient regressor matrix in the weight fit.
class SingularFitError : public Error {
 public:
  using Error::Error;
};

// An online run was requested without the required amount of measured
// history (two full prior days).
class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

// A schedule produced by this library failed its own post-hoc
// feasibility re-check; emitting it would be a bug, so we refuse.
class InfeasibleScheduleError : public Error {
 public:
  using Error::Error;
};

}  // namespace solarsched
