#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dadmm/objectives.hpp"
#include "dadmm/rates.hpp"
#include "dadmm/spectral.hpp"
#include "dadmm/topology.hpp"

namespace dadmm {

struct AdmmConfig {
  double c = 1.0;
  int max_iter = 4000;
  double tol = 1e-15;  // stop once ||x^k - x*|| <= tol
  bool track_duals = false;
  // Assert the G-norm contraction, the primal bound and the three-point
  // identity at every iteration. Implies track_duals.
  bool check_contraction = false;
  // Contraction checks apply while ||x^k - x*|| exceeds this; below it the
  // iterates sit at the rounding floor and the ratios are noise.
  double check_floor = 1e-12;
  // Stop once the error has not improved on its running minimum for this many
  // iterations (0 disables). The run is then truncated at the minimum.
  int stall_window = 100;
};

/// Iterate of the simplified iteration. beta and z are the arc-indexed
/// multiplier and auxiliary variable of the reduced form; they are carried
/// only when dual tracking is on.
struct AdmmState {
  int k = 0;
  BlockVector x;
  BlockVector alpha;
  std::optional<BlockVector> beta;
  std::optional<BlockVector> z;
};

struct ReferenceSolution {
  Eigen::VectorXd x_tilde;
  BlockVector x_star;
  BlockVector z_star;     // 1/2 M+^T x*
  BlockVector beta_star;  // minimum-norm solution of M- beta = -grad f(x*)
};

/// Read-only data shared by every run on one (topology, objectives) pair.
struct Instance {
  Topology topology;
  IncidenceSet incidence;
  GraphSpectra spectra;
  LocalFunctions functions;
  ObjectiveProfile profile;
  ReferenceSolution reference;
  Eigen::MatrixXd lminus_pinv;  // (2 L-)^+, base dimension

  static Instance build(Topology t, LocalFunctions f);
  static Instance build(Topology t, const ObjectiveSet& s) {
    return build(std::move(t), as_local_functions(s));
  }

  int agents() const { return topology.agents(); }
  int dim() const { return functions.front()->dim(); }
};

ReferenceSolution reference_solution(const LocalFunctions& f, const Topology& t,
                                     const IncidenceSet& inc);

// Extended incidence operators applied to stacked block vectors.
BlockVector apply_mplus_t(const Topology& t, const BlockVector& x);   // M+^T x, arcs x N
BlockVector apply_mminus_t(const Topology& t, const BlockVector& x);  // M-^T x
BlockVector apply_mplus(const Topology& t, const BlockVector& y);     // M+ y, agents x N
BlockVector apply_mminus(const Topology& t, const BlockVector& y);    // M- y

/// Weighted distance c ||z - z*||^2 + (1/c) ||beta - beta*||^2.
class GNorm {
 public:
  GNorm(double c, const ReferenceSolution& ref) : c_(c), ref_(&ref) {}

  double distance2(const BlockVector& z, const BlockVector& beta) const;
  double between2(const BlockVector& z_a, const BlockVector& beta_a, const BlockVector& z_b,
                  const BlockVector& beta_b) const;

 private:
  double c_;
  const ReferenceSolution* ref_;
};

/// What agent i can see when it updates: its own iterate and multiplier and
/// the sum of its neighbors' iterates.
struct AgentView {
  Eigen::VectorXd x;
  Eigen::VectorXd alpha;
  Eigen::VectorXd neighbor_sum;
  int degree = 0;
};

/// The per-agent simplified iteration. Holds one factorization per agent of
/// U_i^T U_i + 2 c |N_i| I for quadratic locals.
class AdmmEngine {
 public:
  AdmmEngine(const Topology& t, const LocalFunctions& f, double c);

  double penalty() const { return c_; }

  // x^0 = 0, alpha^0 = 0; with duals beta^0 = 0 and z^0 = 1/2 M+^T x^0.
  AdmmState initial_state(bool track_duals) const;

  // Solves grad f_i(x) + 2c|N_i| x = c(|N_i| x_i^k + sum_j x_j^k) - alpha_i^k.
  Eigen::VectorXd agent_x_update(int agent, const AgentView& view) const;

  AdmmState step(const AdmmState& s) const;

 private:
  const Topology* topology_;
  const LocalFunctions* functions_;
  double c_;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> factors_;  // empty for non-quadratic locals
  std::vector<Eigen::VectorXd> grad_at_zero_;
};

AdmmState step_simplified(const AdmmState& s, const Topology& t, const LocalFunctions& f,
                          double c);

/// The three-step ADMM on the matrix form min f(x) s.t. A x + B z = 0, kept
/// as an oracle for the simplified iteration. All vectors are flat.
struct FullAdmmOperators {
  Eigen::MatrixXd a;  // [A1; A2], 4EN x LN
  Eigen::MatrixXd b;  // [-I; -I], 4EN x 2EN
  int arcs = 0;
  int dim = 0;
};

FullAdmmOperators assemble_full_operators(const Topology& t, int dim);

struct FullAdmmState {
  int k = 0;
  Eigen::VectorXd x;       // LN
  Eigen::VectorXd z;       // 2EN
  Eigen::VectorXd lambda;  // [beta; gamma], 4EN
};

// x^0 = 0, z^0 = 1/2 M+^T x^0, beta^0 = -gamma^0 = 0.
FullAdmmState full_initial_state(const FullAdmmOperators& ops, int agents);

FullAdmmState step_full(const FullAdmmState& s, const FullAdmmOperators& ops,
                        const LocalFunctions& f, double c);

// || grad f(x) + A^T lambda + c A^T (A x + B z) || for the x-minimization.
double full_x_stationarity(const Eigen::VectorXd& x, const FullAdmmState& prev,
                           const FullAdmmOperators& ops, const LocalFunctions& f, double c);

struct TrajectoryRow {
  int k = 0;
  double err_x = 0.0;
  std::optional<double> err_u_g2;
  std::optional<double> rho_k;
  std::optional<double> rho_bar_k;
};

enum class StopReason { tolerance, max_iter, stalled };
std::string_view to_string(StopReason r);

struct ContractionStats {
  int checked = 0;                 // iterations with contraction assertions
  double delta = 0.0;              // delta(mu*, c) asserted against
  double worst_ratio = 0.0;        // max of G^{k+1} (1+delta) / G^k
  double worst_primal_gap = -1e300;  // max of ||x^{k+1}-x*||^2 - G^k/m_f
  double worst_identity = 0.0;     // max scaled residual of the three-point identity
  double worst_dual_residual = 0.0;  // max scaled dual feasibility residual
};

struct AdmmRun {
  std::vector<TrajectoryRow> rows;
  AdmmState final_state;
  RateReport rates;
  StopReason reason = StopReason::max_iter;
  std::optional<ContractionStats> checks;
};

/// Runs the simplified iteration from x^0 = 0, alpha^0 = 0 until the error
/// reaches cfg.tol, the iteration cap, or stalls. With check_contraction set,
/// throws InvariantViolation at the first iteration where a bound fails.
AdmmRun run(const Instance& inst, const AdmmConfig& cfg);

}  // namespace dadmm
