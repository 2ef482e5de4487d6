#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comorbid {

// Base of every error raised by the library. Each subclass maps to one
// failure mode so callers can decide between rejecting a term and aborting.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed export content. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateTermError : public Error {
 public:
  explicit DuplicateTermError(const std::string& term_id)
      : Error("duplicate term id '" + term_id + "'"), term_id_(term_id) {}

  const std::string& term_id() const noexcept { return term_id_; }

 private:
  std::string term_id_;
};

// A value outside its mathematical domain (negative count, empty input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Derived contingency cell would be negative.
class InconsistentMarginalsError : public Error {
 public:
  using Error::Error;
};

// Zero cell reached a log-odds or standard-error computation.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Every redraw for one imputation sample produced infeasible marginals.
class CensoringInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Zero standard error where a test statistic is required.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class NotSelectedError : public Error {
 public:
  using Error::Error;
};

class NotComparableError : public Error {
 public:
  using Error::Error;
};

// Planted odds ratio cannot be realized with the requested marginals.
class InfeasibleEffectError : public Error {
 public:
  InfeasibleEffectError(const std::string& term_id, const std::string& what)
      : Error(term_id.empty() ? what : "term '" + term_id + "': " + what), term_id_(term_id) {}

  const std::string& term_id() const noexcept { return term_id_; }

 private:
  std::string term_id_;
};

// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace comorbid
