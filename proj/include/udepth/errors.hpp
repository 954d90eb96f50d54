#pragma once

#include <stdexcept>
#include <string>

namespace udepth {

/// Malformed or inconsistent input data (files, listings, map sizes).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate geometry, divergence, or other numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace udepth
