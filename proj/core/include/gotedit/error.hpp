#pragma once

#include <stdexcept>
#include <string>

namespace gotedit {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs violate a documented precondition (shape, range, finiteness).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A GTED file is malformed: bad magic, version, dtype, or truncated payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The operating system refused a read or write.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gotedit
