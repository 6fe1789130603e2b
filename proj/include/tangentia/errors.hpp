#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tangentia {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed something outside an operation's contract.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A function evaluation produced a nonfinite value or left its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Data that should satisfy an algebraic identity does not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// An operation's mathematical hypotheses do not hold at the given input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at offset " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace tangentia
