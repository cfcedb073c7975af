#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "dadmm/topology.hpp"

namespace dadmm {

// Stacked block vector: row i holds the N-dimensional block of agent (or arc)
// i. Row-major storage makes the memory layout the concatenated vector.
using BlockVector = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base (N = 1) incidence and Laplacian matrices of a topology.
///
/// The extended operators acting on stacked N-blocks are the Kronecker
/// products with I_N; they are never formed. Applying an extended operator to
/// a BlockVector is the base matrix times the (rows x N) block matrix.
struct IncidenceSet {
  Eigen::SparseMatrix<double> m_plus;   // L x 2E, +1 at both endpoints of each arc
  Eigen::SparseMatrix<double> m_minus;  // L x 2E, +1 at the tail, -1 at the head
  Eigen::MatrixXd l_plus;               // signless Laplacian D + A
  Eigen::MatrixXd l_minus;              // signed Laplacian D - A
  Eigen::MatrixXd w;                    // degree matrix
  int block_dim = 1;
};

IncidenceSet build_incidence(const Topology& t, int block_dim);

struct GraphSpectra {
  double lam_max_lplus = 0.0;
  double lam_tmin_lminus = 0.0;  // algebraic connectivity
  double sigma_max_mplus = 0.0;  // sqrt(2 * lam_max_lplus)
  double sigma_tmin_mminus = 0.0;  // sqrt(2 * lam_tmin_lminus)
  double kappa_g = 0.0;
  int lminus_nullity = 0;  // number of zero eigenvalues of L-
};

// An eigenvalue counts as zero when it is at most this fraction of the largest.
inline constexpr double kZeroEigenRelative = 1e-9;

GraphSpectra spectra(const IncidenceSet& inc);

// (2 L-)^+ b, applied to each of the N block coordinates independently.
BlockVector pinv_apply_lminus(const IncidenceSet& inc, const BlockVector& b);

}  // namespace dadmm
