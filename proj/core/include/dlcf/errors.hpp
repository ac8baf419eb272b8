#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlcf {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A softmax row has no unmasked entry.
class DegenerateRowError : public Error {
 public:
  using Error::Error;
};

// An index (token id, embedding row) is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A model, training or run configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input markup; carries the 1-based line when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A parsed record contradicts itself (offsets do not select the term).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A line-oriented dataset record is malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A character span does not overlap any token.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// A checkpoint cannot be read or does not match the target model.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlcf
