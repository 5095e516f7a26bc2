#pragma once

#include <stdexcept>
#include <string>

namespace prw {

// Base of every error raised by the library. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A value became NaN/inf, or an input row was fully masked.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A walk graph cannot be formed (e.g. a single point with tau >= 1).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Not enough classes or points to satisfy an episode request.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed dataset contents.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration document or flag.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace prw
