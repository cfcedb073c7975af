#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dadmm/objectives.hpp"
#include "dadmm/spectral.hpp"

namespace dadmm {

/// Contraction constant of the G-norm iteration for a free parameter mu > 1
/// and penalty c > 0:
///
///   delta = min{ (mu-1) s_min^2 / (mu s_max^2),
///                m_f / (c/4 s_max^2 + mu/c M_f^2 s_min^-2) }
///
/// with s_max = sigma_max(M+) and s_min the smallest nonzero singular value
/// of M-. Throws std::domain_error outside mu > 1, c > 0.
double delta(double mu, double c, const GraphSpectra& g, const ObjectiveProfile& f);

// Both arguments of the min above, for diagnostics and tests.
struct DeltaTerms {
  double graph;
  double objective;
};
DeltaTerms delta_terms(double mu, double c, const GraphSpectra& g, const ObjectiveProfile& f);

// Penalty maximizing delta for a fixed mu: 2 sqrt(mu) M_f / (s_max s_min).
double penalty_for(double mu, const GraphSpectra& g, const ObjectiveProfile& f);

// Free parameter that equalizes both terms at the optimal penalty.
double mu_star(double kappa_f, double kappa_g);

// Maximized contraction constant and the matching rate bound sqrt(1/(1+delta)).
double delta_t(double kappa_f, double kappa_g);
double rho_t(double kappa_f, double kappa_g);

struct RateBundle {
  double c_t = 0.0;
  double mu_star = 0.0;
  double delta_t = 0.0;
  double rho_t = 0.0;
};

RateBundle rate_bundle(const GraphSpectra& g, const ObjectiveProfile& f);

inline double c_t(const GraphSpectra& g, const ObjectiveProfile& f) {
  return rate_bundle(g, f).c_t;
}

/// Empirical rates of an error series err_0, err_1, ...
///
/// rho[k] = err_k / err_{k-1} and rho_bar[k] = (err_k / err_0)^(1/k) for
/// k >= 1; index 0 is empty. rho_bar_terminal is rho_bar at the last index.
struct RateReport {
  std::vector<std::optional<double>> rho;
  std::vector<std::optional<double>> rho_bar;
  double rho_bar_terminal = 0.0;
  int iterations = 0;
  double terminal_error = 0.0;
};

RateReport empirical_rates(std::span<const double> errors);

}  // namespace dadmm
