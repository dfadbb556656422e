#pragma once

#include <stdexcept>
#include <string>

namespace molab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input or parameter shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a value (range, sign, finiteness) does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical solver diverged or produced non-finite values.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A binary container or text file could not be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Parse failure in a key=value config; carries the 1-based line number.
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace molab
