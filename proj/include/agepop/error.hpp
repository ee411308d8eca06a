#pragma once

#include <stdexcept>
#include <string>

namespace agepop {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input or configuration: bad parameters, violated gain constraints,
/// infeasible setpoints, mismatched grids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed or produced an inadmissible state.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace agepop
