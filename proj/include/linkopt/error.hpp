#pragma once

#include <stdexcept>
#include <string>

namespace linkopt {

/// Base class for all linkopt errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input, configuration, or API misuse. CLI maps this to exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-finite values, diverging training. CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

}  // namespace linkopt
