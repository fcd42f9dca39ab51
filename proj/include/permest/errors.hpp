#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace permest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed matrix text or space descriptor.
class ParseError : public Error {
 public:
  enum class Kind { empty_input, bad_header, non_numeric, dimension_mismatch, bad_descriptor };

  ParseError(Kind kind, std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// An input exceeds a size cap (factorial blowup, seed space, audit cost).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An input violates a mathematical precondition (shape, sign, range).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Power iteration ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_value, double residual)
      : Error(what), best_value_(best_value), residual_(residual) {}

  double best_value() const noexcept { return best_value_; }
  double residual() const noexcept { return residual_; }

 private:
  double best_value_;
  double residual_;
};

}  // namespace permest
