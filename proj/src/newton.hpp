#pragma once

#include <string>

#include <Eigen/Dense>

#include "dadmm/errors.hpp"

namespace dadmm::detail {

// Newton with Armijo backtracking on a smooth strongly convex function.
template <typename Value, typename Grad, typename Hess>
Eigen::VectorXd damped_newton(Value&& value, Grad&& grad, Hess&& hess, Eigen::VectorXd x,
                              double tolerance) {
  constexpr int kMaxSteps = 50;
  for (int step = 0; step < kMaxSteps; ++step) {
    const Eigen::VectorXd g = grad(x);
    if (g.norm() <= tolerance) return x;
    const Eigen::VectorXd d = -hess(x).ldlt().solve(g);
    const double fx = value(x);
    const double slope = g.dot(d);
    const double gnorm = g.norm();
    // Sufficient decrease in the value, or in the gradient norm once the
    // value differences fall below rounding.
    auto accept = [&](double t) {
      const Eigen::VectorXd trial = x + t * d;
      return value(trial) <= fx + 1e-4 * t * slope || grad(trial).norm() < gnorm;
    };
    double t = 1.0;
    while (t > 1e-12 && !accept(t)) t *= 0.5;
    x += t * d;
  }
  if (grad(x).norm() <= tolerance) return x;
  throw ConvergenceFailure("damped Newton did not reach gradient norm " +
                           std::to_string(tolerance));
}

}  // namespace dadmm::detail
