#pragma once

#include <stdexcept>
#include <string>

namespace mcse {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A skill parameter, covariance, or configuration value is out of its domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// A likelihood evaluated to a non-finite value for an observation.
class InvalidObservation : public Error {
 public:
  using Error::Error;
};

// Every particle (or hypothesis) lost all of its weight.
class DegenerateFilter : public Error {
 public:
  using Error::Error;
};

// Input data is missing, malformed, or too small.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcse
