#pragma once

#include <stdexcept>
#include <string>

namespace fedattr {

// Every library error derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class WeightSumError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SubsetSizeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Raised by the SA vault when a query would reveal fewer than N_sa updates.
class AuthorizationError : public Error {
 public:
  using Error::Error;
};

class UnknownClient : public Error {
 public:
  using Error::Error;
};

class RetryLimitExceeded : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class NoParticipation : public Error {
 public:
  using Error::Error;
};

class ThresholdInfeasible : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace fedattr
