#include "dadmm/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dadmm/errors.hpp"

namespace dadmm {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("symmetric eigensolver did not converge");
  }
  return solver;
}

double zero_threshold(const Eigen::VectorXd& eigenvalues) {
  return kZeroEigenRelative * eigenvalues.cwiseAbs().maxCoeff();
}

}  // namespace

IncidenceSet build_incidence(const Topology& t, int block_dim) {
  if (block_dim < 1) throw std::invalid_argument("block dimension must be positive");
  const int n = t.agents();
  const auto& arcs = t.arcs();
  const int cols = static_cast<int>(arcs.size());

  std::vector<Eigen::Triplet<double>> plus;
  std::vector<Eigen::Triplet<double>> minus;
  plus.reserve(2 * arcs.size());
  minus.reserve(2 * arcs.size());
  for (int q = 0; q < cols; ++q) {
    plus.emplace_back(arcs[q].from, q, 1.0);
    plus.emplace_back(arcs[q].to, q, 1.0);
    minus.emplace_back(arcs[q].from, q, 1.0);
    minus.emplace_back(arcs[q].to, q, -1.0);
  }

  IncidenceSet inc;
  inc.block_dim = block_dim;
  inc.m_plus.resize(n, cols);
  inc.m_plus.setFromTriplets(plus.begin(), plus.end());
  inc.m_minus.resize(n, cols);
  inc.m_minus.setFromTriplets(minus.begin(), minus.end());

  inc.w = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) inc.w(i, i) = t.degree(i);
  for (const Edge& e : t.edges()) {
    adjacency(e.i, e.j) = 1.0;
    adjacency(e.j, e.i) = 1.0;
  }
  inc.l_plus = inc.w + adjacency;
  inc.l_minus = inc.w - adjacency;
  return inc;
}

GraphSpectra spectra(const IncidenceSet& inc) {
  const auto plus = decompose(inc.l_plus);
  const auto minus = decompose(inc.l_minus);

  GraphSpectra s;
  s.lam_max_lplus = plus.eigenvalues().maxCoeff();
  const double zero = zero_threshold(minus.eigenvalues());
  s.lam_tmin_lminus = 0.0;
  for (Eigen::Index k = 0; k < minus.eigenvalues().size(); ++k) {
    const double lam = minus.eigenvalues()(k);
    if (lam <= zero) {
      ++s.lminus_nullity;
    } else if (s.lam_tmin_lminus == 0.0 || lam < s.lam_tmin_lminus) {
      s.lam_tmin_lminus = lam;
    }
  }
  if (s.lam_tmin_lminus <= 0.0) {
    throw std::invalid_argument("signed Laplacian has no nonzero eigenvalue");
  }
  s.sigma_max_mplus = std::sqrt(2.0 * s.lam_max_lplus);
  s.sigma_tmin_mminus = std::sqrt(2.0 * s.lam_tmin_lminus);
  s.kappa_g = s.sigma_max_mplus / s.sigma_tmin_mminus;
  return s;
}

BlockVector pinv_apply_lminus(const IncidenceSet& inc, const BlockVector& b) {
  if (b.rows() != inc.l_minus.rows()) throw std::invalid_argument("block vector row mismatch");
  const auto eig = decompose(inc.l_minus);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double zero = zero_threshold(lam);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) > zero) inv(k) = 1.0 / (2.0 * lam(k));
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  BlockVector out = v * (inv.asDiagonal() * (v.transpose() * b));
  return out;
}

}  // namespace dadmm
