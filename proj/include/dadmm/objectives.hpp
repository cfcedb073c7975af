#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dadmm/spectral.hpp"

namespace dadmm {

// Variance of the measurement noise added to v = U x_true.
inline constexpr double kNoiseVariance = 0.1;

// Resample U whenever lambda_min(U^T U) falls below this.
inline constexpr double kMinGramEigenvalue = 1e-8;

// f_i(x) = 1/2 ||v - U x||^2
struct QuadraticLocal {
  Eigen::MatrixXd u;
  Eigen::VectorXd v;
};

struct ObjectiveSet {
  std::vector<QuadraticLocal> locals;
  int dim = 0;
  Eigen::VectorXd x_true;  // signal used for generation; may be empty

  int agents() const { return static_cast<int>(locals.size()); }
};

struct ObjectiveProfile {
  double m_f = 0.0;  // min_i lambda_min(U_i^T U_i)
  double big_m_f = 0.0;  // max_i lambda_max(U_i^T U_i)
  double kappa_f = 0.0;
};

/// Gaussian least-squares instance: x_true ~ N(0, I), U entries ~ N(0, 1),
/// v = U x_true + noise with the given variance. Each of x_true, U and the
/// noise draws from its own substream of `seed`.
ObjectiveSet generate(int agents, int dim, std::uint64_t seed,
                      double noise_variance = kNoiseVariance);

// Builds measurements for caller-supplied U matrices.
ObjectiveSet synthesize(std::vector<Eigen::MatrixXd> u, Eigen::VectorXd x_true,
                        double noise_variance, std::uint64_t seed);

/// Maps each agent's singular values affinely onto [sqrt(1/kappa), 1] (the
/// smallest to the lower end, the largest to 1) and rebuilds U from its
/// singular factors. When x_true is known the measurement v is rebuilt as
/// U_new x_true plus the original noise realization; otherwise v is kept.
ObjectiveSet shape_condition(const ObjectiveSet& s, double kappa_target);

BlockVector gradient(const ObjectiveSet& s, const BlockVector& x);

ObjectiveProfile profile(const ObjectiveSet& s);

struct CentralSolution {
  Eigen::VectorXd x_tilde;  // common minimizer
  BlockVector x_star;       // x_tilde replicated at every agent
};

CentralSolution centralized_solve(const ObjectiveSet& s);

// CSV: header row, then one row per agent with U row-major and v, then a
// final row keyed "x_true" carrying the generation signal in the v columns.
void write_objectives_csv(std::ostream& out, const ObjectiveSet& s);
ObjectiveSet read_objectives_csv(std::istream& in);

/// A strongly convex local function with Lipschitz gradient.
///
/// Implementations declare their constants m and M; the engine trusts them
/// for rate computations. Quadratic implementations report a constant
/// Hessian so the x-update can use a single factorization.
class SmoothLocal {
 public:
  virtual ~SmoothLocal() = default;

  virtual int dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
  virtual double strong_convexity() const = 0;
  virtual double lipschitz() const = 0;
  virtual bool quadratic() const { return false; }
};

class QuadraticObjective final : public SmoothLocal {
 public:
  explicit QuadraticObjective(QuadraticLocal local);

  int dim() const override { return static_cast<int>(local_.u.cols()); }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd&) const override { return gram_; }
  double strong_convexity() const override { return m_; }
  double lipschitz() const override { return big_m_; }
  bool quadratic() const override { return true; }

 private:
  QuadraticLocal local_;
  Eigen::MatrixXd gram_;
  double m_;
  double big_m_;
};

using LocalFunctions = std::vector<std::shared_ptr<const SmoothLocal>>;

LocalFunctions as_local_functions(const ObjectiveSet& s);

BlockVector gradient(const LocalFunctions& f, const BlockVector& x);
ObjectiveProfile profile(const LocalFunctions& f);

// Damped Newton on sum_i f_i; exact in one step for quadratics.
CentralSolution centralized_solve(const LocalFunctions& f);

/// Solves grad f(x) + weight * x = rhs by damped Newton with backtracking,
/// to gradient norm 1e-12 (scaled by max(1, ||rhs||)) within 50 steps.
Eigen::VectorXd solve_regularized(const SmoothLocal& f, double weight, const Eigen::VectorXd& rhs,
                                  const Eigen::VectorXd& start);

}  // namespace dadmm
