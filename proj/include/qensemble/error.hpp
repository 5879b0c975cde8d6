#pragma once

#include <stdexcept>

namespace qens {

/// Bad input: out-of-range parameters, malformed grids, unknown config keys.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced non-finite values or missed an oracle tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qens
