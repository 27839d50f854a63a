#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pendavg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad expression text, bad resonance, bad config.
class ConfigError : public Error {
public:
  using Error::Error;
};

class ParseError : public ConfigError {
public:
  ParseError(const std::string& message, std::size_t offset)
      : ConfigError(message + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Hard numerical failure: quadrature panel cap, integrator step exhaustion,
/// expression domain errors, shooting breakdown.
class NumericalError : public Error {
public:
  using Error::Error;
};

class EvalError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace pendavg
