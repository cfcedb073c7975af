#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dadmm/admm.hpp"

namespace dadmm {

// Symmetric doubly stochastic weights conforming to the graph.
struct MixingMatrix {
  Eigen::MatrixXd w;
};

// w_ij = 1 / (1 + max(d_i, d_j)) on edges, w_ii = 1 - sum_j w_ij.
MixingMatrix metropolis_weights(const Topology& t);

struct DgdOptions {
  int iters = 4000;
  // Numerator of the diminishing step scale / k^(1/3). Defaults to
  // min(1, 1/M_f), which is exactly 1 for objectives with M_f <= 1.
  std::optional<double> step_scale;
};

struct DgdRun {
  std::vector<TrajectoryRow> rows;  // err_u_g2 is never set
  BlockVector final_x;
  RateReport rates;
  double step_scale = 1.0;
};

/// Distributed gradient descent from x^0 = 0:
///   x^{k+1} = W x^k - step_scale / (k+1)^(1/3) * grad f(x^k).
DgdRun run_dgd(const Instance& inst, const DgdOptions& opts);

}  // namespace dadmm
