#include "dadmm/dgd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCore>

#include "dadmm/errors.hpp"

namespace dadmm {

MixingMatrix metropolis_weights(const Topology& t) {
  const int n = t.agents();
  MixingMatrix m{Eigen::MatrixXd::Zero(n, n)};
  for (const Edge& e : t.edges()) {
    const double w = 1.0 / (1.0 + std::max(t.degree(e.i), t.degree(e.j)));
    m.w(e.i, e.j) = w;
    m.w(e.j, e.i) = w;
  }
  for (int i = 0; i < n; ++i) m.w(i, i) = 1.0 - m.w.row(i).sum();
  return m;
}

DgdRun run_dgd(const Instance& inst, const DgdOptions& opts) {
  if (opts.iters < 1) throw std::invalid_argument("DGD needs at least one iteration");
  const MixingMatrix mixing = metropolis_weights(inst.topology);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> w = mixing.w.sparseView();

  DgdRun result;
  result.step_scale = opts.step_scale.value_or(std::min(1.0, 1.0 / inst.profile.big_m_f));
  const BlockVector& x_star = inst.reference.x_star;
  BlockVector x = BlockVector::Zero(inst.agents(), inst.dim());
  std::vector<double> errors{(x - x_star).norm()};
  for (int k = 0; k < opts.iters; ++k) {
    const double step = result.step_scale / std::cbrt(static_cast<double>(k + 1));
    BlockVector next = w * x;
    next -= step * gradient(inst.functions, x);
    x = std::move(next);
    const double err = (x - x_star).norm();
    if (!std::isfinite(err)) {
      throw InvariantViolation("DGD iterates diverged at k=" + std::to_string(k + 1));
    }
    errors.push_back(err);
  }
  result.final_x = x;
  result.rates = empirical_rates(errors);
  result.rows.reserve(errors.size());
  for (std::size_t k = 0; k < errors.size(); ++k) {
    result.rows.push_back({static_cast<int>(k), errors[k], std::nullopt, result.rates.rho[k],
                           result.rates.rho_bar[k]});
  }
  return result;
}

}  // namespace dadmm
