#pragma once

#include <stdexcept>
#include <string>

namespace predcomb {

// Base of every error the library raises. Numerical failures derive from
// NumericalError so front ends can map them to one exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LengthMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class BasisCountOutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LabelOutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class EmptyGrid : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ZeroVarianceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveNoise : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateTarget : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace predcomb
