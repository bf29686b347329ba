#pragma once

#include <stdexcept>
#include <string>

namespace signvar {

/// Base class for every error raised by the library. Each subclass maps to
/// one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or inconsistent configuration / arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

/// Problems with input data: ragged CSV, non-finite values, too few rows.
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// The restriction set could not be satisfied within the allotted budget.
/// Usually means the identified set is empty or has negligible mass.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, long long attempts)
      : Error(what), attempts_(attempts) {}
  [[nodiscard]] int exit_code() const noexcept override { return 4; }
  [[nodiscard]] long long attempts() const noexcept { return attempts_; }

 private:
  long long attempts_;
};

/// Factorization failures, singular matrices, ESS shrink-cap overruns.
class NumericalError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 5; }
};

}  // namespace signvar
