#pragma once

#include <stdexcept>
#include <string>

namespace gestalt {

/// Numerical failure: divergence, non-convergence, singular solve.
/// The CLI maps this family to exit code 1.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File/format problems. The CLI maps these (and std::invalid_argument)
/// to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gestalt
