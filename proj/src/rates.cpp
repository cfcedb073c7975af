#include "dadmm/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace dadmm {

namespace {

void require_condition_numbers(double kappa_f, double kappa_g) {
  if (!(kappa_f >= 1.0) || !(kappa_g > 0.0) || !std::isfinite(kappa_f) || !std::isfinite(kappa_g)) {
    throw std::domain_error("condition numbers need kappa_f >= 1 and kappa_G > 0");
  }
}

}  // namespace

DeltaTerms delta_terms(double mu, double c, const GraphSpectra& g, const ObjectiveProfile& f) {
  if (!(mu > 1.0)) throw std::domain_error("delta needs mu > 1");
  if (!(c > 0.0)) throw std::domain_error("delta needs c > 0");
  const double smax2 = g.sigma_max_mplus * g.sigma_max_mplus;
  const double smin2 = g.sigma_tmin_mminus * g.sigma_tmin_mminus;
  DeltaTerms t;
  t.graph = (mu - 1.0) * smin2 / (mu * smax2);
  t.objective = f.m_f / (0.25 * c * smax2 + (mu / c) * f.big_m_f * f.big_m_f / smin2);
  return t;
}

double delta(double mu, double c, const GraphSpectra& g, const ObjectiveProfile& f) {
  const DeltaTerms t = delta_terms(mu, c, g, f);
  return std::min(t.graph, t.objective);
}

double penalty_for(double mu, const GraphSpectra& g, const ObjectiveProfile& f) {
  if (!(mu > 1.0)) throw std::domain_error("penalty needs mu > 1");
  return 2.0 * std::sqrt(mu) * f.big_m_f / (g.sigma_max_mplus * g.sigma_tmin_mminus);
}

double mu_star(double kappa_f, double kappa_g) {
  require_condition_numbers(kappa_f, kappa_g);
  // (1 + a^2/2 - (a/2) sqrt(a^2 + 4))^-1 with a = kappa_G / kappa_f, in the
  // equivalent form 1 + a (a + sqrt(a^2 + 4)) / 2.
  const double a = kappa_g / kappa_f;
  return 1.0 + 0.5 * a * (a + std::sqrt(a * a + 4.0));
}

double delta_t(double kappa_f, double kappa_g) {
  require_condition_numbers(kappa_f, kappa_g);
  // sqrt(1/kf^2 + 4/kG^2)/(2 kf) - 1/(2 kf^2), rationalized.
  const double b = 4.0 * kappa_f * kappa_f / (kappa_g * kappa_g);
  return (2.0 / (kappa_g * kappa_g)) / (std::sqrt(1.0 + b) + 1.0);
}

double rho_t(double kappa_f, double kappa_g) {
  return std::sqrt(1.0 / (1.0 + delta_t(kappa_f, kappa_g)));
}

RateBundle rate_bundle(const GraphSpectra& g, const ObjectiveProfile& f) {
  RateBundle r;
  r.mu_star = mu_star(f.kappa_f, g.kappa_g);
  r.c_t = penalty_for(r.mu_star, g, f);
  r.delta_t = delta_t(f.kappa_f, g.kappa_g);
  r.rho_t = std::sqrt(1.0 / (1.0 + r.delta_t));
  return r;
}

RateReport empirical_rates(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("empirical_rates of an empty series");
  if (!(errors.front() > 0.0)) throw std::invalid_argument("initial error must be positive");
  RateReport r;
  const std::size_t n = errors.size();
  r.rho.assign(n, std::nullopt);
  r.rho_bar.assign(n, std::nullopt);
  for (std::size_t k = 1; k < n; ++k) {
    if (errors[k - 1] > 0.0) r.rho[k] = errors[k] / errors[k - 1];
    r.rho_bar[k] = std::pow(errors[k] / errors.front(), 1.0 / static_cast<double>(k));
  }
  r.iterations = static_cast<int>(n - 1);
  r.terminal_error = errors.back();
  r.rho_bar_terminal = n > 1 ? *r.rho_bar.back() : 1.0;
  return r;
}

}  // namespace dadmm
