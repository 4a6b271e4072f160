#pragma once

#include <stdexcept>
#include <string>

namespace fsk {

// Raised for malformed or inconsistent input data: bad files, shape
// mismatches, datasets that cannot support the requested episodes.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an iterative solver produces non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsk
