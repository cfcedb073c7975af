#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dadmm/admm.hpp"
#include "dadmm/topology.hpp"

namespace dadmm {

enum class ExperimentKind {
  linear_convergence,
  c_sweep,
  theta_sweep,
  kappa_f_sweep,
  topology_study,
  bipartite_study,
  dgd_compare,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

/// How one configuration point builds its graph. Random and bipartite graphs
/// take either a fixed p or a range p is drawn from uniformly per seed.
struct TopologySpec {
  TopologyKind kind = TopologyKind::random;
  int agents = 50;
  std::optional<double> p;
  std::optional<std::pair<double, double>> p_range;
  std::array<int, 3> dims{0, 0, 0};  // grid3d
  int imbalance = 0;                // bipartite
};

enum class CPolicy { c_t, theta, value, grid };

struct CSpec {
  CPolicy policy = CPolicy::c_t;
  double theta = 1.0;
  double value = 1.0;
  int grid_points = 50;
  double grid_lo = 1e-3;  // multiples of c_t
  double grid_hi = 10.0;
};

struct PointSpec {
  std::string label;
  TopologySpec topology;
  std::optional<double> kappa_f;
  CSpec c;
  bool with_admm = true;
  bool with_dgd = false;
};

struct ExperimentConfig {
  std::string id;
  ExperimentKind kind = ExperimentKind::linear_convergence;
  int dim = 3;
  std::vector<PointSpec> points;
  std::vector<std::uint64_t> seeds;
  int max_iter = 4000;
  double tol = 1e-15;
  int stall_window = 100;
  double noise_variance = 0.1;
  bool check_contraction = false;
  bool trajectories = true;
  int dgd_iters = 0;  // 0: same as max_iter
  int threads = 0;    // 0: hardware concurrency
  int kappa_g_bins = 20;
  std::string hash;   // of the canonical config text
};

/// Parses one experiment object. Unknown keys are rejected; a non-empty seed
/// list overrides "seeds" when given.
ExperimentConfig parse_config(const nlohmann::json& j,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

struct ResultRow {
  std::string experiment;
  std::string point;
  std::uint64_t seed = 0;
  std::string method;  // admm | dgd
  std::string topology;
  int agents = 0;
  int edges = 0;
  std::optional<double> p;
  std::optional<double> kappa_g;
  std::optional<double> kappa_f;
  std::optional<double> c_t;
  std::optional<double> c;
  std::optional<double> theta;
  std::optional<double> c_star;
  std::optional<double> rho_bar;
  std::optional<double> rho_t;
  std::optional<int> iterations;
  std::optional<double> terminal_error;
  std::optional<double> relative_error;
  std::optional<int> diameter;
  std::optional<double> d_s;
  std::optional<int> imbalance;
  std::string trajectory;
  std::string status = "ok";  // ok | invariant: ... | error: ...
};

struct TrajectoryFile {
  std::string name;
  std::vector<TrajectoryRow> rows;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<TrajectoryFile> trajectories;
  bool invariant_failure = false;
};

// Random ratios are drawn from the "p" substream, edges from "topology".
Topology build_topology(const TopologySpec& t, std::uint64_t seed);

// The per-seed instance a point builds: topology, objectives and reference.
Instance build_instance(const PointSpec& point, int dim, double noise_variance,
                        std::uint64_t seed);

/// Runs every (point, seed) pair, concurrently when threads allow, and returns
/// rows in (point, seed) order. A failing pair yields a row carrying the
/// error instead of aborting the batch.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CStar {
  double c_star = 0.0;
  double rho_bar = 0.0;
  std::vector<double> grid;
  std::vector<double> rho_bars;
};

// Log-spaced grid of `points` values over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);

/// Grid argmin of the terminal rho_bar; ties go to the smaller c.
CStar best_practical_c(const Instance& inst, const std::vector<double>& grid,
                       const AdmmConfig& base);

// Per-(point, kappa_G bin) min/mean/max of rho_bar with equal-width bins in
// log kappa_G over the successful ADMM rows.
void write_kappa_g_summary(std::ostream& out, const std::vector<ResultRow>& rows, int bins);

void write_result_rows(std::ostream& out, const std::vector<ResultRow>& rows);
void write_trajectory(std::ostream& out, const std::vector<TrajectoryRow>& rows);

/// Writes results.csv, one file per trajectory and, for sweeps over random
/// graphs, kappa_g_summary.csv into `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                      const ExperimentResult& result);

}  // namespace dadmm
