#pragma once

#include <stdexcept>
#include <string>

namespace kfmc {

// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

// Pair distance fell inside the hard-core guard.
struct Singularity : Error {
  using Error::Error;
};

struct InsufficientData : Error {
  using Error::Error;
};

struct FitError : Error {
  using Error::Error;
};

struct Unsupported : Error {
  using Error::Error;
};

// Malformed input text. `line` is 1-based, 0 when unknown.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
  std::size_t line;
};

}  // namespace kfmc
