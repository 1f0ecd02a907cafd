#pragma once

#include <stdexcept>
#include <string>

namespace impent {

/// Base of every error thrown by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSectorError : public Error { using Error::Error; };
class ModelSizeError : public Error { using Error::Error; };
class ModelParamError : public Error { using Error::Error; };
class PartitionError : public Error { using Error::Error; };
class ScopeError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DatasetError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class SweepError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, double best_cost) : Error(what), best_cost_(best_cost) {}
  double best_cost() const noexcept { return best_cost_; }

 private:
  double best_cost_;
};

}  // namespace impent
