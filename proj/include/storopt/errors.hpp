#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace storopt {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An SCD period that cannot be split into a single-mode action without
/// changing the objective (strictly negative or positive price with losses).
class RepairNotApplicable : public Error {
 public:
  RepairNotApplicable(std::size_t period, const std::string& why)
      : Error("period " + std::to_string(period + 1) + ": " + why), period_(period) {}
  std::size_t period() const noexcept { return period_; }

 private:
  std::size_t period_;
};

class NotNegativePrice : public Error {
 public:
  using Error::Error;
};

class NoNegativePrices : public Error {
 public:
  using Error::Error;
};

class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class MissingDuals : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class HorizonTooLong : public Error {
 public:
  using Error::Error;
};

/// Input parse failure; line is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A solver produced a result that breaks one of its own postconditions.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace storopt
