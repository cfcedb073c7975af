#pragma once

#include <stdexcept>
#include <string>

namespace dadmm {

// A runtime check on a mathematical invariant failed (KKT residual,
// contraction, coupling). The CLI maps this to exit code 2.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

// An inner iterative solve (damped Newton, eigensolver) did not converge.
class ConvergenceFailure : public std::runtime_error {
 public:
  explicit ConvergenceFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dadmm
