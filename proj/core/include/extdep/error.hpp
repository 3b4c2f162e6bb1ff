#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extdep {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or parameters that violate a documented constraint.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Input outside the region where an operation is defined (boundary points,
// probabilities with no attainable root, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

class UnsupportedError : public Error {
public:
  using Error::Error;
};

// A numerical routine could not reach its tolerance. The best estimate and
// its error are kept so callers can decide whether to accept them.
class NumericError : public Error {
public:
  NumericError(const std::string& what, double estimate, double error_estimate)
      : Error(what), estimate_(estimate), error_(error_estimate) {}
  explicit NumericError(const std::string& what) : NumericError(what, 0.0, 0.0) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_; }

private:
  double estimate_;
  double error_;
};

class EstimationError : public Error {
public:
  using Error::Error;
};

class OptimizationError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

// J could not be inverted, so no sandwich covariance exists.
class CovarianceError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

class SamplingError : public Error {
public:
  using Error::Error;
};

// Malformed or unusable input data (files, columns, missing values).
class DataError : public Error {
public:
  using Error::Error;
};

// Probability integral transform hit F = 0 or F = 1.
class TransformError : public ValidationError {
public:
  TransformError(const std::string& what, std::size_t index);
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

}  // namespace extdep
