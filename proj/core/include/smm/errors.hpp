#pragma once

#include <stdexcept>
#include <string>

namespace smm {

/// Bad user input: malformed files, invalid parameters, violated preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a finite, well-defined result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace smm
