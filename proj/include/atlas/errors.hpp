#pragma once

#include <stdexcept>
#include <string>

namespace atlas {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (non-positive intensity, empty sizes, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state produced by a numerical scheme.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point outside the domain of a function (e.g. behind the front).
class DomainError : public Error {
 public:
  using Error::Error;
};

class RegimeError : public Error {
 public:
  using Error::Error;
};

class OutOfMassError : public Error {
 public:
  using Error::Error;
};

class UnsupportedQueryError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// A Monte Carlo run whose analysis window is contaminated by truncation of
/// the particle system, or which cannot answer the requested query.
class InvalidatedRunError : public Error {
 public:
  using Error::Error;
};

}  // namespace atlas
