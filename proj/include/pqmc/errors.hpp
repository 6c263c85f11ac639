#pragma once

#include <stdexcept>
#include <string>

namespace pqmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration object (projection, quadrature, estimator...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dimension not covered by a table or by an exact algorithm.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration would exceed its configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not certify its own accuracy.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// A plain (unprojected) estimator met a sample mapped to +-infinity.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// An experiment plan or CLI request failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pqmc
