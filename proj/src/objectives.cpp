#include "dadmm/objectives.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dadmm/csv.hpp"
#include "dadmm/errors.hpp"
#include "dadmm/rng.hpp"
#include "newton.hpp"

namespace dadmm {

namespace {

Eigen::VectorXd gram_eigenvalues(const Eigen::MatrixXd& u) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u.transpose() * u, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw ConvergenceFailure("eigensolver failed on U^T U");
  return eig.eigenvalues();
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
  return m;
}

void check_blocks(const BlockVector& x, int agents, int dim) {
  if (x.rows() != agents || x.cols() != dim) {
    throw std::invalid_argument("stacked vector has shape " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", expected " +
                                std::to_string(agents) + "x" + std::to_string(dim));
  }
}

}  // namespace

ObjectiveSet synthesize(std::vector<Eigen::MatrixXd> u, Eigen::VectorXd x_true,
                        double noise_variance, std::uint64_t seed) {
  ObjectiveSet s;
  s.dim = static_cast<int>(x_true.size());
  s.x_true = std::move(x_true);
  Rng noise_rng = make_rng(seed, "noise");
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance));
  s.locals.reserve(u.size());
  for (auto& ui : u) {
    if (ui.cols() != s.dim) throw std::invalid_argument("U column count differs from x_true size");
    Eigen::VectorXd v = ui * s.x_true;
    if (noise_variance > 0.0) {
      for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += noise(noise_rng);
    }
    s.locals.push_back({std::move(ui), std::move(v)});
  }
  return s;
}

ObjectiveSet generate(int agents, int dim, std::uint64_t seed, double noise_variance) {
  if (agents < 1 || dim < 1) throw std::invalid_argument("generate needs L >= 1 and N >= 1");
  Rng x_rng = make_rng(seed, "x_true");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x_true(dim);
  for (int k = 0; k < dim; ++k) x_true(k) = normal(x_rng);

  Rng u_rng = make_rng(seed, "U");
  std::vector<Eigen::MatrixXd> u;
  u.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    Eigen::MatrixXd ui = gaussian_matrix(dim, dim, u_rng);
    while (gram_eigenvalues(ui).minCoeff() < kMinGramEigenvalue) ui = gaussian_matrix(dim, dim, u_rng);
    u.push_back(std::move(ui));
  }
  return synthesize(std::move(u), std::move(x_true), noise_variance, seed);
}

ObjectiveSet shape_condition(const ObjectiveSet& s, double kappa_target) {
  if (!(kappa_target >= 1.0)) throw std::invalid_argument("target condition number must be >= 1");
  const double lower = std::sqrt(1.0 / kappa_target);
  ObjectiveSet out = s;
  for (auto& local : out.locals) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(local.u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double s_max = sv.maxCoeff();
    const double s_min = sv.minCoeff();
    Eigen::VectorXd mapped(sv.size());
    if (s_max - s_min <= 1e-14 * s_max) {
      mapped.setOnes();
    } else {
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        mapped(k) = lower + (1.0 - lower) * (sv(k) - s_min) / (s_max - s_min);
      }
    }
    const Eigen::MatrixXd rebuilt = svd.matrixU() * mapped.asDiagonal() * svd.matrixV().transpose();
    if (s.x_true.size() == s.dim) {
      const Eigen::VectorXd noise = local.v - local.u * s.x_true;
      local.v = rebuilt * s.x_true + noise;
    }
    local.u = rebuilt;
  }
  return out;
}

BlockVector gradient(const ObjectiveSet& s, const BlockVector& x) {
  check_blocks(x, s.agents(), s.dim);
  BlockVector g(x.rows(), x.cols());
  for (int i = 0; i < s.agents(); ++i) {
    const auto& f = s.locals[i];
    const Eigen::VectorXd xi = x.row(i).transpose();
    g.row(i) = (f.u.transpose() * (f.u * xi - f.v)).transpose();
  }
  return g;
}

ObjectiveProfile profile(const ObjectiveSet& s) {
  if (s.locals.empty()) throw std::invalid_argument("profile of an empty objective set");
  ObjectiveProfile p;
  p.m_f = std::numeric_limits<double>::infinity();
  for (const auto& f : s.locals) {
    const Eigen::VectorXd lam = gram_eigenvalues(f.u);
    if (lam.minCoeff() <= 0.0) throw InvariantViolation("U^T U is not positive definite");
    p.m_f = std::min(p.m_f, lam.minCoeff());
    p.big_m_f = std::max(p.big_m_f, lam.maxCoeff());
  }
  p.kappa_f = p.big_m_f / p.m_f;
  return p;
}

CentralSolution centralized_solve(const ObjectiveSet& s) {
  if (s.locals.empty()) throw std::invalid_argument("centralized_solve of an empty objective set");
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(s.dim, s.dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s.dim);
  for (const auto& f : s.locals) {
    normal += f.u.transpose() * f.u;
    rhs += f.u.transpose() * f.v;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("normal matrix is singular");
  CentralSolution sol;
  sol.x_tilde = llt.solve(rhs);
  // One step of iterative refinement keeps the residual at rounding level.
  sol.x_tilde += llt.solve(rhs - normal * sol.x_tilde);
  const double residual = (normal * sol.x_tilde - rhs).norm();
  if (residual > 1e-10 * (1.0 + rhs.norm())) {
    throw InvariantViolation("centralized solve residual " + std::to_string(residual));
  }
  sol.x_star = sol.x_tilde.transpose().replicate(s.agents(), 1);
  return sol;
}

void write_objectives_csv(std::ostream& out, const ObjectiveSet& s) {
  const int n = s.dim;
  std::vector<std::string> header{"agent"};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) header.push_back("U_" + std::to_string(r) + "_" + std::to_string(c));
  }
  for (int r = 0; r < n; ++r) header.push_back("v_" + std::to_string(r));
  out << csv::join(header) << '\n';
  for (int i = 0; i < s.agents(); ++i) {
    const auto& f = s.locals[i];
    std::vector<std::string> row{std::to_string(i)};
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) row.push_back(csv::number(f.u(r, c)));
    }
    for (int r = 0; r < n; ++r) row.push_back(csv::number(f.v(r)));
    out << csv::join(row) << '\n';
  }
  if (s.x_true.size() == n) {
    std::vector<std::string> row{"x_true"};
    row.resize(1 + n * n);
    for (int r = 0; r < n; ++r) row.push_back(csv::number(s.x_true(r)));
    out << csv::join(row) << '\n';
  }
}

ObjectiveSet read_objectives_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("objective CSV is empty");
  const auto header = csv::split(line);
  // header = 1 + N^2 + N columns
  int n = 0;
  while (1 + n * n + n < static_cast<int>(header.size())) ++n;
  if (n == 0 || 1 + n * n + n != static_cast<int>(header.size())) {
    throw std::invalid_argument("objective CSV header has unexpected width");
  }
  ObjectiveSet s;
  s.dim = n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) throw std::invalid_argument("objective CSV row width");
    if (fields[0] == "x_true") {
      s.x_true.resize(n);
      for (int r = 0; r < n; ++r) s.x_true(r) = csv::parse_number(fields[1 + n * n + r]);
      continue;
    }
    QuadraticLocal f{Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) f.u(r, c) = csv::parse_number(fields[1 + r * n + c]);
    }
    for (int r = 0; r < n; ++r) f.v(r) = csv::parse_number(fields[1 + n * n + r]);
    s.locals.push_back(std::move(f));
  }
  return s;
}

QuadraticObjective::QuadraticObjective(QuadraticLocal local)
    : local_(std::move(local)), gram_(local_.u.transpose() * local_.u) {
  const Eigen::VectorXd lam = gram_eigenvalues(local_.u);
  m_ = lam.minCoeff();
  big_m_ = lam.maxCoeff();
}

double QuadraticObjective::value(const Eigen::VectorXd& x) const {
  return 0.5 * (local_.v - local_.u * x).squaredNorm();
}

Eigen::VectorXd QuadraticObjective::gradient(const Eigen::VectorXd& x) const {
  return local_.u.transpose() * (local_.u * x - local_.v);
}

LocalFunctions as_local_functions(const ObjectiveSet& s) {
  LocalFunctions out;
  out.reserve(s.locals.size());
  for (const auto& f : s.locals) out.push_back(std::make_shared<QuadraticObjective>(f));
  return out;
}

BlockVector gradient(const LocalFunctions& f, const BlockVector& x) {
  if (f.empty()) throw std::invalid_argument("gradient of an empty objective set");
  check_blocks(x, static_cast<int>(f.size()), f.front()->dim());
  BlockVector g(x.rows(), x.cols());
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.row(i) = f[i]->gradient(x.row(i).transpose()).transpose();
  }
  return g;
}

ObjectiveProfile profile(const LocalFunctions& f) {
  if (f.empty()) throw std::invalid_argument("profile of an empty objective set");
  ObjectiveProfile p;
  p.m_f = std::numeric_limits<double>::infinity();
  for (const auto& fi : f) {
    if (!(fi->strong_convexity() > 0.0)) throw InvariantViolation("local function not strongly convex");
    p.m_f = std::min(p.m_f, fi->strong_convexity());
    p.big_m_f = std::max(p.big_m_f, fi->lipschitz());
  }
  p.kappa_f = p.big_m_f / p.m_f;
  return p;
}

CentralSolution centralized_solve(const LocalFunctions& f) {
  if (f.empty()) throw std::invalid_argument("centralized_solve of an empty objective set");
  const int n = f.front()->dim();
  auto value = [&](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (const auto& fi : f) total += fi->value(x);
    return total;
  };
  auto grad = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (const auto& fi : f) g += fi->gradient(x);
    return g;
  };
  auto hess = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (const auto& fi : f) h += fi->hessian(x);
    return h;
  };
  const double scale = std::max(1.0, grad(Eigen::VectorXd::Zero(n)).norm());
  CentralSolution sol;
  sol.x_tilde = detail::damped_newton(value, grad, hess, Eigen::VectorXd::Zero(n), 1e-12 * scale);
  sol.x_star = sol.x_tilde.transpose().replicate(static_cast<Eigen::Index>(f.size()), 1);
  return sol;
}

Eigen::VectorXd solve_regularized(const SmoothLocal& f, double weight, const Eigen::VectorXd& rhs,
                                  const Eigen::VectorXd& start) {
  auto value = [&](const Eigen::VectorXd& x) {
    return f.value(x) + 0.5 * weight * x.squaredNorm() - rhs.dot(x);
  };
  auto grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return f.gradient(x) + weight * x - rhs;
  };
  auto hess = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd h = f.hessian(x);
    h.diagonal().array() += weight;
    return h;
  };
  return detail::damped_newton(value, grad, hess, start, 1e-12 * std::max(1.0, rhs.norm()));
}

}  // namespace dadmm
