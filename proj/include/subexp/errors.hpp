#pragma once

#include <stdexcept>
#include <string>

namespace subexp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates an operation's stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed document, probe token or command-line value.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Quadrature failed to converge, or a value left the representable range.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An exact result would need a number outside the a + sqrt(b) exponent field.
class NotRepresentable : public Error {
 public:
  using Error::Error;
};

// Witness search exhausted the truncated range.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace subexp
