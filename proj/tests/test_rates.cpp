#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dadmm/rates.hpp"

using namespace dadmm;

namespace {

GraphSpectra synthetic(double sigma_max, double sigma_tmin) {
  GraphSpectra g;
  g.sigma_max_mplus = sigma_max;
  g.sigma_tmin_mminus = sigma_tmin;
  g.lam_max_lplus = sigma_max * sigma_max / 2.0;
  g.lam_tmin_lminus = sigma_tmin * sigma_tmin / 2.0;
  g.kappa_g = sigma_max / sigma_tmin;
  return g;
}

ObjectiveProfile prof(double m, double big_m) { return {m, big_m, big_m / m}; }

// Contraction constant written out term by term, independent of the library.
double delta_oracle(double mu, double c, double smax, double smin, double m, double big_m) {
  const double first = (mu - 1.0) * smin * smin / (mu * smax * smax);
  const double second = m / (c / 4.0 * smax * smax + mu / c * big_m * big_m / (smin * smin));
  return first < second ? first : second;
}

double mu_literal(double kf, double kg) {
  return 1.0 / (1.0 + kg * kg / (2 * kf * kf) - kg / (2 * kf) * std::sqrt(kg * kg / (kf * kf) + 4));
}

double delta_t_literal(double kf, double kg) {
  return 1.0 / (2 * kf) * std::sqrt(1.0 / (kf * kf) + 4.0 / (kg * kg)) - 1.0 / (2 * kf * kf);
}

// max over (mu, c) of the oracle by a log grid followed by coordinate refinement
double delta_numeric_max(double kf, double kg) {
  const double smin = 1.0, smax = kg, m = 1.0, big_m = kf;
  double best = 0.0, best_mu = 2.0, best_c = 1.0;
  for (int i = 1; i <= 400; ++i) {
    const double mu = 1.0 + std::pow(10.0, -3.0 + 6.0 * i / 400.0);
    for (int j = 0; j <= 400; ++j) {
      const double c = std::pow(10.0, -4.0 + 8.0 * j / 400.0);
      const double d = delta_oracle(mu, c, smax, smin, m, big_m);
      if (d > best) {
        best = d;
        best_mu = mu;
        best_c = c;
      }
    }
  }
  double step_mu = 0.05, step_c = 0.05;
  for (int it = 0; it < 200; ++it) {
    for (double f : {1.0 + step_mu, 1.0 / (1.0 + step_mu)}) {
      const double mu = 1.0 + (best_mu - 1.0) * f;
      const double d = delta_oracle(mu, best_c, smax, smin, m, big_m);
      if (d > best) {
        best = d;
        best_mu = mu;
      }
    }
    for (double f : {1.0 + step_c, 1.0 / (1.0 + step_c)}) {
      const double d = delta_oracle(best_mu, best_c * f, smax, smin, m, big_m);
      if (d > best) {
        best = d;
        best_c *= f;
      }
    }
    step_mu *= 0.9;
    step_c *= 0.9;
  }
  return best;
}

}  // namespace

TEST_CASE("delta matches an independent evaluation") {
  const GraphSpectra edge = synthetic(2.0, 2.0);
  const ObjectiveProfile unit = prof(1.0, 1.0);
  // mu = 2, c = 1: first term 1/2, second 1 / (1 + 2/4) = 2/3
  CHECK(delta(2.0, 1.0, edge, unit) == doctest::Approx(0.5).epsilon(1e-15));
  const DeltaTerms t = delta_terms(2.0, 1.0, edge, unit);
  CHECK(t.graph == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t.objective == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  for (double mu : {1.01, 1.5, 3.0, 40.0}) {
    for (double c : {0.01, 0.3, 1.0, 7.0, 200.0}) {
      for (const auto& [smax, smin] : {std::pair{2.0, 2.0}, {5.0, 0.3}, {30.0, 1.7}}) {
        const ObjectiveProfile f = prof(0.4, 6.0);
        CHECK(delta(mu, c, synthetic(smax, smin), f) ==
              doctest::Approx(delta_oracle(mu, c, smax, smin, 0.4, 6.0)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("delta vanishes as mu approaches 1") {
  const GraphSpectra g = synthetic(3.0, 1.0);
  const ObjectiveProfile f = prof(1.0, 2.0);
  CHECK(delta(1.0 + 1e-9, 1.0, g, f) < 1e-9);
  CHECK(delta(1.0 + 1e-6, 1.0, g, f) < delta(1.0 + 1e-3, 1.0, g, f));
}

TEST_CASE("domain errors") {
  const GraphSpectra g = synthetic(2.0, 2.0);
  const ObjectiveProfile f = prof(1.0, 1.0);
  CHECK_THROWS_AS(delta(1.0, 1.0, g, f), std::domain_error);
  CHECK_THROWS_AS(delta(2.0, 0.0, g, f), std::domain_error);
  CHECK_THROWS_AS(delta(2.0, -1.0, g, f), std::domain_error);
  CHECK_THROWS_AS(mu_star(0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(mu_star(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(delta_t(1.0, -2.0), std::domain_error);
  CHECK_THROWS_AS(penalty_for(1.0, g, f), std::domain_error);
}

TEST_CASE("c_t examples") {
  const GraphSpectra edge = synthetic(2.0, 2.0);
  CHECK(penalty_for(4.0, edge, prof(1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const GraphSpectra g = synthetic(4.0, 0.7);
  for (double s : {0.5, 2.0, 13.0}) {
    CHECK(penalty_for(3.0, g, prof(0.1, 1.0 * s)) ==
          doctest::Approx(s * penalty_for(3.0, g, prof(0.1, 1.0))).epsilon(1e-14));
  }
  const RateBundle rb = rate_bundle(g, prof(0.1, 1.0));
  CHECK(rb.c_t == doctest::Approx(penalty_for(rb.mu_star, g, prof(0.1, 1.0))));
  CHECK(c_t(g, prof(0.1, 1.0)) == rb.c_t);
}

TEST_CASE("mu_star examples") {
  CHECK(mu_star(1.0, 1.0) == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
  CHECK(mu_star(1.0, 1.0) == doctest::Approx(2.618034).epsilon(1e-6));
  CHECK(mu_star(1.0, 1e-8) - 1.0 < 1e-7);
  CHECK(mu_star(1.0, 1e-8) > 1.0);
  for (double kf : {1.0, 3.0, 50.0, 1e3}) {
    for (double kg : {0.5, 1.0, 4.0, 30.0}) {
      CHECK(mu_star(kf, kg) > 1.0);
      CHECK(mu_star(kf, kg) == doctest::Approx(mu_literal(kf, kg)).epsilon(1e-9));
    }
  }
}

TEST_CASE("terms are equal at mu_star and c_t") {
  for (double kf : {1.0, 2.0, 10.0, 100.0, 1e3}) {
    for (double kg : {1.0, 1.4, 5.0, 33.0, 100.0}) {
      const GraphSpectra g = synthetic(kg * 1.3, 1.3);
      const ObjectiveProfile f = prof(0.5, 0.5 * kf);
      const double mu = mu_star(kf, kg);
      const DeltaTerms t = delta_terms(mu, penalty_for(mu, g, f), g, f);
      CHECK(t.graph == doctest::Approx(t.objective).epsilon(1e-10));
    }
  }
}

TEST_CASE("delta_t examples and oracles") {
  CHECK(delta_t(1.0, 1.0) == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
  CHECK(rho_t(1.0, 1.0) == doctest::Approx(0.786151).epsilon(1e-6));
  CHECK(delta_numeric_max(1.0, 1.0) == doctest::Approx(delta_t(1.0, 1.0)).epsilon(1e-6));
  CHECK(delta_numeric_max(10.0, 2.5) == doctest::Approx(delta_t(10.0, 2.5)).epsilon(1e-6));
  CHECK(delta_numeric_max(3.0, 40.0) == doctest::Approx(delta_t(3.0, 40.0)).epsilon(1e-6));
  for (double kf : {1.0, 2.0, 10.0, 100.0}) {
    for (double kg : {0.5, 1.0, 5.0, 50.0}) {
      CHECK(delta_t(kf, kg) == doctest::Approx(delta_t_literal(kf, kg)).epsilon(1e-9));
    }
  }
  for (double kg : {0.5, 1.0, 5.0, 50.0}) CHECK(delta_t(1.0, kg) > delta_t(2.0, kg));
  CHECK(delta_t(1e9, 1.0) < 1e-9);
  CHECK(delta_t(1.0, 1e6) < 1e-11);
}

TEST_CASE("delta at mu_star and c_t equals delta_t across random pairs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double kf = std::pow(10.0, 3.0 * u(rng));
    const double kg = std::pow(10.0, 2.0 * u(rng));
    const double smin = 0.2 + u(rng);
    const GraphSpectra g = synthetic(kg * smin, smin);
    const double m = 0.1 + u(rng);
    const ObjectiveProfile f{m, m * kf, kf};
    const double mu = mu_star(kf, kg);
    CHECK(delta(mu, penalty_for(mu, g, f), g, f) == doctest::Approx(delta_t(kf, kg)).epsilon(1e-10));
  }
}

TEST_CASE("c_t maximizes delta for a fixed mu") {
  const GraphSpectra g = synthetic(6.0, 0.8);
  const ObjectiveProfile f = prof(0.3, 4.0);
  for (double mu : {1.2, 2.0, 9.0}) {
    const double best = delta(mu, penalty_for(mu, g, f), g, f);
    const double c0 = penalty_for(mu, g, f);
    for (int i = -60; i <= 60; ++i) {
      CHECK(delta(mu, c0 * std::pow(10.0, i / 20.0), g, f) <= best + 1e-10);
    }
  }
}

TEST_CASE("rho_t lies in (0, 1) and increases with both condition numbers") {
  const std::vector<double> ks{1.0, 1.5, 3.0, 10.0, 100.0, 1e4};
  for (std::size_t a = 0; a < ks.size(); ++a) {
    for (std::size_t b = 0; b < ks.size(); ++b) {
      const double r = rho_t(ks[a], ks[b]);
      CHECK(r > 0.0);
      CHECK(r < 1.0);
      if (a > 0) CHECK(r > rho_t(ks[a - 1], ks[b]));
      if (b > 0) CHECK(r > rho_t(ks[a], ks[b - 1]));
    }
  }
}

TEST_CASE("empirical rates") {
  SUBCASE("geometric series") {
    std::vector<double> e;
    for (int k = 0; k <= 30; ++k) e.push_back(std::pow(0.9, k));
    const RateReport r = empirical_rates(e);
    CHECK_FALSE(r.rho[0].has_value());
    CHECK_FALSE(r.rho_bar[0].has_value());
    for (int k = 1; k <= 30; ++k) {
      CHECK(*r.rho[k] == doctest::Approx(0.9).epsilon(1e-12));
      CHECK(*r.rho_bar[k] == doctest::Approx(0.9).epsilon(1e-12));
    }
    CHECK(r.iterations == 30);
    CHECK(r.rho_bar_terminal == doctest::Approx(0.9));
  }
  SUBCASE("hand example") {
    const std::vector<double> e{1.0, 0.5, 0.5};
    const RateReport r = empirical_rates(e);
    CHECK(*r.rho[1] == 0.5);
    CHECK(*r.rho[2] == 1.0);
    CHECK(*r.rho_bar[2] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(r.terminal_error == 0.5);
  }
  SUBCASE("running average equals the geometric mean of step ratios") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.3, 1.1);
    std::vector<double> e{2.0};
    for (int k = 0; k < 200; ++k) e.push_back(e.back() * u(rng));
    const RateReport r = empirical_rates(e);
    double log_sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
      log_sum += std::log(*r.rho[k]);
      CHECK(*r.rho_bar[k] == doctest::Approx(std::exp(log_sum / k)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(empirical_rates(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(empirical_rates(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}
