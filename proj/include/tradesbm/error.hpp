#pragma once

#include <stdexcept>
#include <string>

namespace tradesbm {

// Base for every error raised by the library. Callers that only need a
// message can catch std::runtime_error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input (files, arguments, configuration).
class InputError : public Error {
 public:
  using Error::Error;
};

// Numerical failure inside estimation (non-finite potentials, dead chains).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tradesbm
