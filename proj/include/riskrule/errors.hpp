#pragma once

#include <stdexcept>
#include <string>

namespace riskrule {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent dimensions or malformed data.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Argument outside the admissible domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input that is valid in form but degenerate, e.g. all clipped probabilities.
class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Enumeration would exceed the configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Simplex breakdown: tiny pivots, residual blow-up or iteration cap.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class GenerationStallError : public Error {
 public:
  using Error::Error;
};

}  // namespace riskrule
