#pragma once

#include <stdexcept>
#include <string>

namespace setassoc {

// Base for all library failures. Subclasses exist so callers can choose a
// recovery path (e.g. fall back to permutation when integration fails).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated API precondition (caller bug): bad dimensions, out-of-range
// parameters, malformed configuration.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (files, matrices, annotations).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical routine could not reach its accuracy target.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace setassoc
