#pragma once

#include <stdexcept>
#include <string>

namespace ucert {

/// Input violates a precondition (shape, unitarity, range).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// MCMC chains failed the Gelman-Rubin gate.
class DiagnosticError : public std::runtime_error {
 public:
  DiagnosticError(const std::string& what, double r_hat)
      : std::runtime_error(what), r_hat_(r_hat) {}
  double r_hat() const noexcept { return r_hat_; }

 private:
  double r_hat_;
};

/// The requested target can never be reached (e.g. pass probability 1).
class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ucert
