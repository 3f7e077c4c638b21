#pragma once

#include <stdexcept>
#include <string>

namespace insideout {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV rows, images, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant or precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Training diverged (non-finite loss) or could not continue.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace insideout
