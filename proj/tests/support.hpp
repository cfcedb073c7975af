#pragma once

#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "dadmm/objectives.hpp"

namespace dadmm::testing {

// f(x) = sum_n log cosh(a_n x_n - b_n) + m/2 ||x||^2, a non-quadratic local
// with m <= f'' <= m + max a_n^2.
class LogCoshLocal final : public SmoothLocal {
 public:
  LogCoshLocal(Eigen::VectorXd a, Eigen::VectorXd b, double m)
      : a_(std::move(a)), b_(std::move(b)), m_(m) {}

  int dim() const override { return static_cast<int>(a_.size()); }
  double value(const Eigen::VectorXd& x) const override {
    const Eigen::ArrayXd r = a_.array() * x.array() - b_.array();
    // log cosh r = |r| + log1p(exp(-2|r|)) - log 2
    const Eigen::ArrayXd ar = r.abs();
    return (ar + (-2.0 * ar).exp().log1p() - std::log(2.0)).sum() + 0.5 * m_ * x.squaredNorm();
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    const Eigen::ArrayXd r = a_.array() * x.array() - b_.array();
    return (a_.array() * r.tanh()).matrix() + m_ * x;
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    const Eigen::ArrayXd t = (a_.array() * x.array() - b_.array()).tanh();
    Eigen::VectorXd d = (a_.array().square() * (1.0 - t.square())).matrix();
    d.array() += m_;
    return d.asDiagonal();
  }
  double strong_convexity() const override { return m_; }
  double lipschitz() const override { return m_ + a_.array().square().maxCoeff(); }

 private:
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  double m_;
};

inline LocalFunctions log_cosh_functions(int agents, int dim, unsigned seed) {
  LocalFunctions out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < agents; ++i) {
    Eigen::VectorXd a(dim), b(dim);
    for (int n = 0; n < dim; ++n) {
      a(n) = 1.0 + std::abs(gauss(rng));
      b(n) = 2.0 * gauss(rng);
    }
    out.push_back(std::make_shared<LogCoshLocal>(a, b, 0.2 + 0.1 * (i % 3)));
  }
  return out;
}

inline Eigen::Map<const Eigen::VectorXd> flat(const BlockVector& b) { return {b.data(), b.size()}; }

}  // namespace dadmm::testing
