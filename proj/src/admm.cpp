#include "dadmm/admm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dadmm/errors.hpp"
#include "newton.hpp"

namespace dadmm {

namespace {

double inner(const BlockVector& a, const BlockVector& b) {
  return a.cwiseProduct(b).sum();
}

Eigen::MatrixXd pseudo_inverse_2lminus(const IncidenceSet& inc) {
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(inc.l_minus.rows(), inc.l_minus.rows());
  return pinv_apply_lminus(inc, identity);
}

std::string describe(std::string_view what, int k, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << " violated at k=" << k << ": " << lhs << " > " << rhs;
  return os.str();
}

}  // namespace

BlockVector apply_mplus_t(const Topology& t, const BlockVector& x) {
  const auto& arcs = t.arcs();
  BlockVector out(static_cast<Eigen::Index>(arcs.size()), x.cols());
  for (std::size_t q = 0; q < arcs.size(); ++q) out.row(q) = x.row(arcs[q].from) + x.row(arcs[q].to);
  return out;
}

BlockVector apply_mminus_t(const Topology& t, const BlockVector& x) {
  const auto& arcs = t.arcs();
  BlockVector out(static_cast<Eigen::Index>(arcs.size()), x.cols());
  for (std::size_t q = 0; q < arcs.size(); ++q) out.row(q) = x.row(arcs[q].from) - x.row(arcs[q].to);
  return out;
}

BlockVector apply_mplus(const Topology& t, const BlockVector& y) {
  BlockVector out = BlockVector::Zero(t.agents(), y.cols());
  const auto& arcs = t.arcs();
  for (std::size_t q = 0; q < arcs.size(); ++q) {
    out.row(arcs[q].from) += y.row(q);
    out.row(arcs[q].to) += y.row(q);
  }
  return out;
}

BlockVector apply_mminus(const Topology& t, const BlockVector& y) {
  BlockVector out = BlockVector::Zero(t.agents(), y.cols());
  const auto& arcs = t.arcs();
  for (std::size_t q = 0; q < arcs.size(); ++q) {
    out.row(arcs[q].from) += y.row(q);
    out.row(arcs[q].to) -= y.row(q);
  }
  return out;
}

ReferenceSolution reference_solution(const LocalFunctions& f, const Topology& t,
                                     const IncidenceSet& inc) {
  if (static_cast<int>(f.size()) != t.agents()) {
    throw std::invalid_argument("one local function per agent is required");
  }
  const CentralSolution central = centralized_solve(f);
  ReferenceSolution ref;
  ref.x_tilde = central.x_tilde;
  ref.x_star = central.x_star;
  ref.z_star = 0.5 * apply_mplus_t(t, ref.x_star);
  const BlockVector grad_star = gradient(f, ref.x_star);
  ref.beta_star = -apply_mminus_t(t, pinv_apply_lminus(inc, grad_star));

  const double stationarity = (grad_star + apply_mminus(t, ref.beta_star)).norm();
  if (stationarity > 1e-8) {
    throw InvariantViolation(describe("KKT stationarity", 0, stationarity, 1e-8));
  }
  const double consensus = apply_mminus_t(t, ref.x_star).norm();
  if (consensus > 1e-12) throw InvariantViolation(describe("KKT consensus", 0, consensus, 1e-12));
  return ref;
}

Instance Instance::build(Topology t, LocalFunctions f) {
  if (f.empty()) throw std::invalid_argument("instance needs local functions");
  IncidenceSet inc = build_incidence(t, f.front()->dim());
  GraphSpectra spec = dadmm::spectra(inc);
  ObjectiveProfile prof = dadmm::profile(f);
  ReferenceSolution ref = reference_solution(f, t, inc);
  Eigen::MatrixXd pinv = pseudo_inverse_2lminus(inc);
  return Instance{std::move(t), std::move(inc), spec, std::move(f), prof, std::move(ref),
                  std::move(pinv)};
}

double GNorm::distance2(const BlockVector& z, const BlockVector& beta) const {
  return c_ * (z - ref_->z_star).squaredNorm() + (beta - ref_->beta_star).squaredNorm() / c_;
}

double GNorm::between2(const BlockVector& z_a, const BlockVector& beta_a, const BlockVector& z_b,
                       const BlockVector& beta_b) const {
  return c_ * (z_a - z_b).squaredNorm() + (beta_a - beta_b).squaredNorm() / c_;
}

AdmmEngine::AdmmEngine(const Topology& t, const LocalFunctions& f, double c)
    : topology_(&t), functions_(&f), c_(c) {
  if (!(c > 0.0)) throw std::invalid_argument("penalty parameter c must be positive");
  if (static_cast<int>(f.size()) != t.agents()) {
    throw std::invalid_argument("one local function per agent is required");
  }
  const int n = f.front()->dim();
  factors_.resize(f.size());
  grad_at_zero_.resize(f.size());
  for (int i = 0; i < t.agents(); ++i) {
    if (!f[i]->quadratic()) continue;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd system = f[i]->hessian(zero);
    system.diagonal().array() += 2.0 * c * t.degree(i);
    factors_[i].compute(system);
    grad_at_zero_[i] = f[i]->gradient(zero);
  }
}

AdmmState AdmmEngine::initial_state(bool track_duals) const {
  const int n = functions_->front()->dim();
  AdmmState s;
  s.x = BlockVector::Zero(topology_->agents(), n);
  s.alpha = BlockVector::Zero(topology_->agents(), n);
  if (track_duals) {
    s.beta = BlockVector::Zero(topology_->arc_count(), n);
    s.z = 0.5 * apply_mplus_t(*topology_, s.x);
  }
  return s;
}

Eigen::VectorXd AdmmEngine::agent_x_update(int agent, const AgentView& view) const {
  const Eigen::VectorXd rhs = c_ * (view.degree * view.x + view.neighbor_sum) - view.alpha;
  const SmoothLocal& f = *(*functions_)[agent];
  if (f.quadratic()) return factors_[agent].solve(rhs - grad_at_zero_[agent]);
  return solve_regularized(f, 2.0 * c_ * view.degree, rhs, view.x);
}

AdmmState AdmmEngine::step(const AdmmState& s) const {
  const Topology& t = *topology_;
  AdmmState next;
  next.k = s.k + 1;
  next.x.resize(s.x.rows(), s.x.cols());
  for (int i = 0; i < t.agents(); ++i) {
    AgentView view;
    view.x = s.x.row(i).transpose();
    view.alpha = s.alpha.row(i).transpose();
    view.neighbor_sum = Eigen::VectorXd::Zero(s.x.cols());
    for (int j : t.neighbors(i)) view.neighbor_sum += s.x.row(j).transpose();
    view.degree = t.degree(i);
    next.x.row(i) = agent_x_update(i, view).transpose();
  }
  next.alpha.resize(s.alpha.rows(), s.alpha.cols());
  for (int i = 0; i < t.agents(); ++i) {
    Eigen::RowVectorXd laplacian_row = t.degree(i) * next.x.row(i);
    for (int j : t.neighbors(i)) laplacian_row -= next.x.row(j);
    next.alpha.row(i) = s.alpha.row(i) + c_ * laplacian_row;
  }
  if (s.beta) {
    next.beta = *s.beta + (0.5 * c_) * apply_mminus_t(t, next.x);
    next.z = 0.5 * apply_mplus_t(t, next.x);
  }
  return next;
}

AdmmState step_simplified(const AdmmState& s, const Topology& t, const LocalFunctions& f,
                          double c) {
  return AdmmEngine(t, f, c).step(s);
}

FullAdmmOperators assemble_full_operators(const Topology& t, int dim) {
  const auto& arcs = t.arcs();
  const int q_count = static_cast<int>(arcs.size());
  const int rows = q_count * dim;
  FullAdmmOperators ops;
  ops.arcs = q_count;
  ops.dim = dim;
  ops.a = Eigen::MatrixXd::Zero(2 * rows, t.agents() * dim);
  for (int q = 0; q < q_count; ++q) {
    ops.a.block(q * dim, arcs[q].from * dim, dim, dim).setIdentity();
    ops.a.block(rows + q * dim, arcs[q].to * dim, dim, dim).setIdentity();
  }
  ops.b = Eigen::MatrixXd::Zero(2 * rows, rows);
  ops.b.topRows(rows) = -Eigen::MatrixXd::Identity(rows, rows);
  ops.b.bottomRows(rows) = -Eigen::MatrixXd::Identity(rows, rows);
  return ops;
}

FullAdmmState full_initial_state(const FullAdmmOperators& ops, int agents) {
  const int rows = ops.arcs * ops.dim;
  FullAdmmState s;
  s.x = Eigen::VectorXd::Zero(agents * ops.dim);
  // 1/2 M+^T x = 1/2 (A1 + A2) x
  s.z = 0.5 * (ops.a.topRows(rows) + ops.a.bottomRows(rows)) * s.x;
  s.lambda = Eigen::VectorXd::Zero(2 * rows);
  return s;
}

namespace {

double local_sum_value(const LocalFunctions& f, const Eigen::VectorXd& x, int dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) total += f[i]->value(x.segment(i * dim, dim));
  return total;
}

Eigen::VectorXd local_gradient(const LocalFunctions& f, const Eigen::VectorXd& x, int dim) {
  Eigen::VectorXd g(x.size());
  for (std::size_t i = 0; i < f.size(); ++i) g.segment(i * dim, dim) = f[i]->gradient(x.segment(i * dim, dim));
  return g;
}

}  // namespace

double full_x_stationarity(const Eigen::VectorXd& x, const FullAdmmState& prev,
                           const FullAdmmOperators& ops, const LocalFunctions& f, double c) {
  const Eigen::VectorXd g = local_gradient(f, x, ops.dim) + ops.a.transpose() * prev.lambda +
                            c * ops.a.transpose() * (ops.a * x + ops.b * prev.z);
  return g.norm();
}

FullAdmmState step_full(const FullAdmmState& s, const FullAdmmOperators& ops,
                        const LocalFunctions& f, double c) {
  if (s.x.size() != ops.a.cols() || s.z.size() != ops.b.cols() || s.lambda.size() != ops.a.rows()) {
    throw std::invalid_argument("full ADMM state does not match the operators");
  }
  const int dim = ops.dim;
  const Eigen::MatrixXd ata = ops.a.transpose() * ops.a;
  const Eigen::VectorXd bz = ops.b * s.z;

  // x-update: minimize L_c(x, z^k, lambda^k).
  auto value = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd r = ops.a * x + bz;
    return local_sum_value(f, x, dim) + s.lambda.dot(r) + 0.5 * c * r.squaredNorm();
  };
  auto grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return local_gradient(f, x, dim) + ops.a.transpose() * s.lambda +
           c * ops.a.transpose() * (ops.a * x + bz);
  };
  auto hess = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd h = c * ata;
    for (std::size_t i = 0; i < f.size(); ++i) {
      h.block(i * dim, i * dim, dim, dim) += f[i]->hessian(x.segment(i * dim, dim));
    }
    return h;
  };
  const double scale = std::max(1.0, (ops.a.transpose() * s.lambda).norm() + c * (ops.a.transpose() * bz).norm());

  FullAdmmState next;
  next.k = s.k + 1;
  next.x = detail::damped_newton(value, grad, hess, s.x, 1e-13 * scale);

  // z-update: B^T lambda^k + c B^T (A x^{k+1} + B z) = 0.
  const Eigen::MatrixXd btb = ops.b.transpose() * ops.b;
  next.z = -btb.ldlt().solve(ops.b.transpose() * (s.lambda / c + ops.a * next.x));

  next.lambda = s.lambda + c * (ops.a * next.x + ops.b * next.z);
  return next;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iter: return "max_iter";
    case StopReason::stalled: return "stalled";
  }
  return "unknown";
}

namespace {

// Per-iteration assertions of the G-norm analysis between iterates k and k+1.
class ContractionChecker {
 public:
  ContractionChecker(const Instance& inst, double c)
      : inst_(inst), c_(c), gnorm_(c, inst.reference),
        grad_star_(gradient(inst.functions, inst.reference.x_star)) {
    const double mu = mu_star(inst.profile.kappa_f, inst.spectra.kappa_g);
    stats_.delta = delta(mu, c, inst.spectra, inst.profile);
    u_star_norm_ = std::sqrt(c * inst.reference.z_star.squaredNorm() +
                             inst.reference.beta_star.squaredNorm() / c);
  }

  // Exact structural relations that hold at every iterate.
  void structural(const AdmmState& s) {
    const Topology& t = inst_.topology;
    const double coupling = (*s.z - 0.5 * apply_mplus_t(t, s.x)).norm();
    if (coupling > 1e-12 * (1.0 + s.z->norm())) {
      throw InvariantViolation(describe("z = 1/2 M+^T x", s.k, coupling, 1e-12));
    }
    const BlockVector m_beta = apply_mminus(t, *s.beta);
    const double alpha_gap = (s.alpha - m_beta).norm();
    if (alpha_gap > 1e-12 * (1.0 + s.alpha.norm())) {
      throw InvariantViolation(describe("alpha = M- beta", s.k, alpha_gap, 1e-12));
    }
    const BlockVector projected = apply_mminus_t(t, inst_.lminus_pinv * m_beta);
    const double off_space = (*s.beta - projected).norm();
    if (off_space > 1e-10 * (1.0 + s.beta->norm())) {
      throw InvariantViolation(describe("beta in col(M-^T)", s.k, off_space, 1e-10));
    }
  }

  void step(const AdmmState& cur, const AdmmState& next, double err_cur, double err_next,
            double floor) {
    structural(next);
    if (err_cur <= floor) return;
    ++stats_.checked;
    const Topology& t = inst_.topology;
    const double g_cur = gnorm_.distance2(*cur.z, *cur.beta);
    const double g_next = gnorm_.distance2(*next.z, *next.beta);
    const double delta = stats_.delta;

    stats_.worst_ratio = std::max(stats_.worst_ratio, g_next * (1.0 + delta) / g_cur);
    const double bound = (1.0 + 1e-8) / (1.0 + delta) * g_cur;
    if (g_next > bound) {
      std::ostringstream os;
      os.precision(17);
      os << "G-norm contraction violated at k=" << cur.k << ": ||u^{k+1}-u*||_G^2=" << g_next
         << " ||u^k-u*||_G^2=" << g_cur << " delta=" << delta;
      throw InvariantViolation(os.str());
    }

    const double primal_gap = err_next * err_next - g_cur / inst_.profile.m_f;
    stats_.worst_primal_gap = std::max(stats_.worst_primal_gap, primal_gap);
    if (primal_gap > 1e-12) {
      throw InvariantViolation(describe("||x^{k+1}-x*||^2 <= G^k/m_f", cur.k, primal_gap, 1e-12));
    }

    const BlockVector grad_next = gradient(inst_.functions, next.x);
    const double lhs = inner(next.x - inst_.reference.x_star, grad_next - grad_star_);
    const double rhs = g_cur - g_next - gnorm_.between2(*cur.z, *cur.beta, *next.z, *next.beta);
    // Both sides are bilinear in differences against u*, whose rounding error
    // scales with ||u*||, so the residual is measured against that product.
    const double dist = std::sqrt(g_cur);
    const double identity = std::abs(lhs - rhs) / (dist * (dist + u_star_norm_));
    stats_.worst_identity = std::max(stats_.worst_identity, identity);
    if (identity > 1e-8) {
      throw InvariantViolation(describe("three-point identity", cur.k, identity, 1e-8));
    }

    const BlockVector dual = grad_next + apply_mminus(t, *next.beta) -
                             c_ * apply_mplus(t, *cur.z - *next.z);
    const double dual_scaled = dual.norm() / (1.0 + grad_next.norm());
    stats_.worst_dual_residual = std::max(stats_.worst_dual_residual, dual_scaled);
    if (dual_scaled > 1e-9) {
      throw InvariantViolation(describe("dual feasibility", cur.k, dual_scaled, 1e-9));
    }
  }

  const ContractionStats& stats() const { return stats_; }

 private:
  const Instance& inst_;
  double c_;
  GNorm gnorm_;
  BlockVector grad_star_;
  double u_star_norm_ = 0.0;
  ContractionStats stats_;
};

}  // namespace

AdmmRun run(const Instance& inst, const AdmmConfig& cfg) {
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(cfg.tol >= 0.0)) throw std::invalid_argument("tol must be non-negative");
  const bool duals = cfg.track_duals || cfg.check_contraction;
  const AdmmEngine engine(inst.topology, inst.functions, cfg.c);
  const GNorm gnorm(cfg.c, inst.reference);
  std::optional<ContractionChecker> checker;
  if (cfg.check_contraction) checker.emplace(inst, cfg.c);

  const BlockVector& x_star = inst.reference.x_star;
  AdmmState state = engine.initial_state(duals);
  std::vector<double> errors{(state.x - x_star).norm()};
  std::vector<std::optional<double>> g_values;
  g_values.push_back(duals ? std::optional(gnorm.distance2(*state.z, *state.beta)) : std::nullopt);
  if (checker) checker->structural(state);

  AdmmRun result;
  result.reason = StopReason::max_iter;
  AdmmState best = state;
  if (errors.front() <= cfg.tol) {
    result.reason = StopReason::tolerance;
  } else {
    while (state.k < cfg.max_iter) {
      AdmmState next = engine.step(state);
      const double err = (next.x - x_star).norm();
      if (checker) checker->step(state, next, errors.back(), err, cfg.check_floor);
      errors.push_back(err);
      g_values.push_back(duals ? std::optional(gnorm.distance2(*next.z, *next.beta)) : std::nullopt);
      state = std::move(next);
      if (err <= cfg.tol) {
        result.reason = StopReason::tolerance;
        best = state;
        break;
      }
      if (err < errors[best.k]) {
        best = state;
      } else if (cfg.stall_window > 0 && state.k - best.k >= cfg.stall_window) {
        result.reason = StopReason::stalled;
        break;
      }
    }
    if (result.reason == StopReason::max_iter) best = state;
  }

  errors.resize(best.k + 1);
  g_values.resize(best.k + 1);
  result.final_state = std::move(best);
  if (errors.front() > 0.0) {
    result.rates = empirical_rates(errors);
  } else {
    result.rates.rho.assign(1, std::nullopt);
    result.rates.rho_bar.assign(1, std::nullopt);
  }
  result.rows.reserve(errors.size());
  for (std::size_t k = 0; k < errors.size(); ++k) {
    result.rows.push_back({static_cast<int>(k), errors[k], g_values[k], result.rates.rho[k],
                           result.rates.rho_bar[k]});
  }
  if (checker) result.checks = checker->stats();
  return result;
}

}  // namespace dadmm
