#pragma once

#include <stdexcept>
#include <string>

namespace ipm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An evaluator or a simulation produced NaN or an infinity.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// All particle weights vanished; resampling is impossible.
class DegenerateEnsembleError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain where a formula is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed or the file is malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipm
