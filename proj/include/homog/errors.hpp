#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace homog {

/// Base class for every failure raised by the library. The CLI maps the
/// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergedQuadrature : public Error {
 public:
  NonConvergedQuadrature(const std::string& what, double error_estimate)
      : Error(what), error_estimate_(error_estimate) {}
  double error_estimate() const { return error_estimate_; }

 private:
  double error_estimate_;
};

class IncompatibleRepresentations : public Error {
 public:
  using Error::Error;
};

class MissingGradient : public Error {
 public:
  using Error::Error;
};

class NonCoercive : public Error {
 public:
  using Error::Error;
};

class ValidationFailure : public Error {
 public:
  ValidationFailure(const std::string& what, std::vector<std::string> clauses)
      : Error(what), clauses_(std::move(clauses)) {}
  const std::vector<std::string>& clauses() const { return clauses_; }

 private:
  std::vector<std::string> clauses_;
};

/// The level sets {alpha h + S = v} carry positive mass, so the mean of the
/// pressure inverse jumps and its inverse is not defined.
class Em0Violation : public Error {
 public:
  Em0Violation(const std::string& what, double alpha, double x, double v,
               double mass)
      : Error(what), alpha_(alpha), x_(x), v_(v), mass_(mass) {}
  double alpha() const { return alpha_; }
  double x() const { return x_; }
  double v() const { return v_; }
  double mass() const { return mass_; }

 private:
  double alpha_, x_, v_, mass_;
};

class NonlinearSolveFailure : public Error {
 public:
  NonlinearSolveFailure(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

class NeedsRegularization : public Error {
 public:
  using Error::Error;
};

class SigmaCauchyFailure : public Error {
 public:
  SigmaCauchyFailure(const std::string& what, std::vector<double> distances)
      : Error(what), distances_(std::move(distances)) {}
  const std::vector<double>& distances() const { return distances_; }

 private:
  std::vector<double> distances_;
};

class ResolutionTooCoarse : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace homog
