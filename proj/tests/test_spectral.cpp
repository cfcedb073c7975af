#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "dadmm/rng.hpp"
#include "dadmm/spectral.hpp"

using namespace dadmm;

namespace {

Eigen::MatrixXd dense(const Eigen::SparseMatrix<double>& m) { return Eigen::MatrixXd(m); }

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
}

std::vector<Topology> sample_graphs() {
  return {special(TopologyKind::line, 2),      special(TopologyKind::line, 7),
          special(TopologyKind::cycle, 5),     special(TopologyKind::cycle, 6),
          special(TopologyKind::star, 9),      special(TopologyKind::complete, 6),
          grid3d(2, 3, 2),                     random_connected(11, 0.3, 1),
          random_connected(15, 0.6, 2),        bipartite(12, 2, 0.3, 3)};
}

}  // namespace

TEST_CASE("single edge incidence matrices") {
  const IncidenceSet inc = build_incidence(special(TopologyKind::line, 2), 1);
  Eigen::Matrix2d ones;
  ones << 1, 1, 1, 1;
  Eigen::Matrix2d signed_;
  signed_ << 1, -1, -1, 1;
  CHECK(dense(inc.m_plus) == ones);
  CHECK(dense(inc.m_minus) == signed_);
  CHECK(inc.l_plus == Eigen::MatrixXd(ones));
  CHECK(inc.l_minus == Eigen::MatrixXd(signed_));
  CHECK(inc.w == Eigen::MatrixXd::Identity(2, 2));
  CHECK(spectra(inc).kappa_g == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("triangle Laplacians") {
  const IncidenceSet inc = build_incidence(special(TopologyKind::complete, 3), 1);
  Eigen::Matrix3d lp, lm;
  lp << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  lm << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  CHECK(inc.l_plus == Eigen::MatrixXd(lp));
  CHECK(inc.l_minus == Eigen::MatrixXd(lm));
}

TEST_CASE("incidence identities hold exactly") {
  for (const Topology& t : sample_graphs()) {
    const IncidenceSet inc = build_incidence(t, 3);
    const Eigen::MatrixXd mp = dense(inc.m_plus);
    const Eigen::MatrixXd mm = dense(inc.m_minus);
    CHECK(mp.cols() == t.arc_count());
    CHECK(0.5 * mp * mp.transpose() == inc.l_plus);
    CHECK(0.5 * mm * mm.transpose() == inc.l_minus);
    CHECK(0.5 * (inc.l_plus + inc.l_minus) == inc.w);
    CHECK(mm.colwise().sum().isZero(0.0));
    CHECK((mp.colwise().sum().array() == 2.0).all());
    for (int i = 0; i < t.agents(); ++i) CHECK(inc.w(i, i) == t.degree(i));
    CHECK(inc.block_dim == 3);
    // arc q = (from, to): +1 at from and -1 at to
    for (int q = 0; q < t.arc_count(); ++q) {
      CHECK(mm(t.arcs()[q].from, q) == 1.0);
      CHECK(mm(t.arcs()[q].to, q) == -1.0);
    }
  }
}

TEST_CASE("complete graph spectrum") {
  const GraphSpectra g = spectra(build_incidence(special(TopologyKind::complete, 200), 1));
  CHECK(g.lam_max_lplus == doctest::Approx(398.0).epsilon(1e-10));
  CHECK(g.lam_tmin_lminus == doctest::Approx(200.0).epsilon(1e-10));
  CHECK(g.kappa_g == doctest::Approx(std::sqrt(398.0 / 200.0)).epsilon(1e-10));
  CHECK(std::abs(g.kappa_g - 1.411) <= 1e-3);
}

TEST_CASE("star spectrum") {
  for (int agents : {3, 10, 50, 200}) {
    const GraphSpectra g = spectra(build_incidence(special(TopologyKind::star, agents), 1));
    CHECK(g.lam_max_lplus == doctest::Approx(agents).epsilon(1e-10));
    CHECK(g.lam_tmin_lminus == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.kappa_g == doctest::Approx(std::sqrt(agents)).epsilon(1e-10));
  }
}

TEST_CASE("spectral scalars are consistent") {
  for (const Topology& t : sample_graphs()) {
    const GraphSpectra g = spectra(build_incidence(t, 1));
    CHECK(g.lminus_nullity == 1);
    CHECK(g.lam_tmin_lminus > 0.0);
    CHECK(g.sigma_max_mplus == doctest::Approx(std::sqrt(2.0 * g.lam_max_lplus)));
    CHECK(g.sigma_tmin_mminus == doctest::Approx(std::sqrt(2.0 * g.lam_tmin_lminus)));
    CHECK(g.kappa_g == doctest::Approx(std::sqrt(g.lam_max_lplus / g.lam_tmin_lminus)));
    // singular values of the incidence matrices themselves
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_p(dense(build_incidence(t, 1).m_plus));
    CHECK(svd_p.singularValues()(0) == doctest::Approx(g.sigma_max_mplus).epsilon(1e-10));
  }
}

TEST_CASE("signless Laplacian is singular exactly for bipartite graphs") {
  auto lam_min_plus = [](const Topology& t) {
    const IncidenceSet inc = build_incidence(t, 1);
    return sorted_eigenvalues(inc.l_plus)(0) / sorted_eigenvalues(inc.l_plus).maxCoeff();
  };
  CHECK(lam_min_plus(special(TopologyKind::star, 7)) < 1e-12);
  CHECK(lam_min_plus(special(TopologyKind::line, 6)) < 1e-12);
  CHECK(lam_min_plus(special(TopologyKind::cycle, 8)) < 1e-12);
  CHECK(lam_min_plus(grid3d(2, 3, 3)) < 1e-12);
  CHECK(lam_min_plus(bipartite(14, 4, 0.3, 9)) < 1e-12);
  CHECK(lam_min_plus(special(TopologyKind::complete, 3)) > 1e-3);
  CHECK(lam_min_plus(special(TopologyKind::cycle, 7)) > 1e-3);
}

TEST_CASE("extended operators repeat the base spectrum N times") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Topology t = random_connected(6 + static_cast<int>(seed), 0.5, seed);
    const IncidenceSet inc = build_incidence(t, 1);
    const Eigen::VectorXd base = sorted_eigenvalues(inc.l_minus);
    for (int n = 1; n <= 3; ++n) {
      const Eigen::MatrixXd ext =
          Eigen::kroneckerProduct(inc.l_minus, Eigen::MatrixXd::Identity(n, n));
      const Eigen::VectorXd got = sorted_eigenvalues(ext);
      Eigen::VectorXd want(base.size() * n);
      for (int i = 0; i < base.size(); ++i) want.segment(i * n, n).setConstant(base(i));
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("pseudo-inverse of 2 L-") {
  const Topology tri = special(TopologyKind::complete, 3);
  const IncidenceSet inc = build_incidence(tri, 2);

  SUBCASE("all-ones direction is annihilated") {
    const BlockVector ones = BlockVector::Ones(3, 2);
    CHECK(pinv_apply_lminus(inc, ones).norm() <= 1e-14);
  }
  SUBCASE("eigenvector is scaled by 1/(2 lambda)") {
    BlockVector b(3, 1);
    b << 1, -1, 0;  // L- b = 3 b on the triangle
    const IncidenceSet inc1 = build_incidence(tri, 1);
    const BlockVector got = pinv_apply_lminus(inc1, b);
    CHECK((got - b / 6.0).norm() <= 1e-14);
  }
  SUBCASE("random right-hand sides match a least-squares oracle") {
    for (const Topology& t : {tri, random_connected(9, 0.4, 3), special(TopologyKind::star, 6)}) {
      const IncidenceSet ic = build_incidence(t, 2);
      Rng rng = make_rng(17, "pinv");
      std::normal_distribution<double> gauss;
      BlockVector b(t.agents(), 2);
      for (int i = 0; i < b.size(); ++i) b.data()[i] = gauss(rng);
      // Project onto range(L-), then take the minimum-norm least-squares solution.
      const Eigen::MatrixXd a = 2.0 * ic.l_minus;
      const Eigen::MatrixXd pb = b.rowwise() - b.colwise().mean();
      const Eigen::MatrixXd want = a.completeOrthogonalDecomposition().solve(pb);
      const BlockVector got = pinv_apply_lminus(ic, b);
      CHECK((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
      CHECK((a * got - pb).norm() <= 1e-10 * (1.0 + pb.norm()));
    }
  }
}
