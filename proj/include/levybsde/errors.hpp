#pragma once

#include <stdexcept>
#include <string>

namespace levybsde {

// Bad input: malformed model, coefficients outside their declared class,
// unknown configuration keys. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure inside a solve (rank loss, NaN, non-convergence).
// Maps to CLI exit code 2.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levybsde
