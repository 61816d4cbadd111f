#pragma once

#include <stdexcept>
#include <string>

namespace sobrev {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (overlapping cells, bad sizes...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Operation requested in a regime where it is undefined (e.g. the sp<1
// blow-up bracket at sp>=1).
class RegimeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedComposition : public Error {
 public:
  using Error::Error;
};

class NoWeakDerivative : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Adaptive integration ran out of budget. Carries the best value reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_(best_estimate), err_(error_estimate) {}

  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double best_;
  double err_;
};

}  // namespace sobrev
