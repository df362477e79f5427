#pragma once

#include <stdexcept>
#include <string>

namespace mmbias {

// Base for every error the toolkit raises deliberately. The CLI maps each
// subclass onto a stable process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent user configuration (unknown set name, invalid option).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or inconsistent input files.
class DataFormatError : public Error {
 public:
  using Error::Error;
};

// A numeric quantity is undefined on the given data (zero-norm vector,
// zero standard deviation, too few items).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmbias
