#pragma once

#include <stdexcept>
#include <string>

namespace tlasso {

// Malformed or inconsistent input data: bad CSV rows, non-finite values,
// misaligned dates, too-short series. Maps to CLI exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix or vector dimensions do not match the operation contract.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid parameter value (nu <= 0, quantile outside (0,1], empty grid, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-SPD scale matrix, simulation from a non-stationary
// model, failed factorization. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rank-deficient design: least squares is undefined, a penalized estimator
// must be used instead.
class SingularDesignError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tlasso
