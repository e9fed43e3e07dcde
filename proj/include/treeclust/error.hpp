#pragma once

#include <stdexcept>
#include <string>

namespace treeclust {

// Base for every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input files (missing, malformed CSV, bad constraint lines).
class DataError : public Error {
 public:
  using Error::Error;
};

// Parameter combinations that can never be solved (k > 2^d, kappa out of range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Backend failures: missing binary, unparseable output, model failing verification.
class SolverError : public Error {
 public:
  using Error::Error;
};

// A model that satisfies the formula but cannot be decoded into a
// consistent tree/clustering.
class CorruptModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace treeclust
