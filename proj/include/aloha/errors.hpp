#pragma once

#include <stdexcept>
#include <string>

namespace aloha {

/// Base class for every error this library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid model, parameters or data (CLI exit code 1).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Malformed configuration or usage (CLI exit code 2).
class ParseError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed internally (CLI exit code 3).
class NumericError : public Error {
public:
  using Error::Error;
};

class AssumptionViolated : public DomainError {
public:
  AssumptionViolated(int which, const std::string& detail)
      : DomainError("assumption " + std::to_string(which) + " violated: " + detail),
        which_(which) {}
  int which() const { return which_; }

private:
  int which_;
};

class DimensionMismatch : public DomainError {
public:
  using DomainError::DomainError;
};

class InvalidProbability : public DomainError {
public:
  using DomainError::DomainError;
};

class ScalingTooSmall : public DomainError {
public:
  using DomainError::DomainError;
};

class GridOutOfRange : public DomainError {
public:
  using DomainError::DomainError;
};

class GridMismatch : public DomainError {
public:
  using DomainError::DomainError;
};

class IoError : public DomainError {
public:
  using DomainError::DomainError;
};

class StepTooLarge : public NumericError {
public:
  using NumericError::NumericError;
};

class NoConvergence : public NumericError {
public:
  using NumericError::NumericError;
};

class NumericFailure : public NumericError {
public:
  using NumericError::NumericError;
};

}  // namespace aloha
