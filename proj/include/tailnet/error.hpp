#pragma once

#include <stdexcept>
#include <string>

namespace tailnet {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input (bad parameters, unknown fields, unstable network).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, long iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  long iterations() const { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

/// The simulator's active-session guard tripped.
class GuardError : public Error {
 public:
  GuardError(const std::string& what, long long slot) : Error(what), slot_(slot) {}
  long long slot() const { return slot_; }

 private:
  long long slot_;
};

/// The knapsack search hit its kappa cap without a feasible profile.
class CapExhaustedError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailnet
