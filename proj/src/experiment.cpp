#include "dadmm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "dadmm/csv.hpp"
#include "dadmm/dgd.hpp"
#include "dadmm/errors.hpp"
#include "dadmm/rates.hpp"
#include "dadmm/rng.hpp"

namespace dadmm {

using nlohmann::json;

namespace {

constexpr double kRateSlack = 1e-6;

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kKindNames{{
    {ExperimentKind::linear_convergence, "linear_convergence"},
    {ExperimentKind::c_sweep, "c_sweep"},
    {ExperimentKind::theta_sweep, "theta_sweep"},
    {ExperimentKind::kappa_f_sweep, "kappa_f_sweep"},
    {ExperimentKind::topology_study, "topology_study"},
    {ExperimentKind::bipartite_study, "bipartite_study"},
    {ExperimentKind::dgd_compare, "dgd_compare"},
}};

std::string hex16(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = kDigits[v & 0xf];
  return s;
}

// A scalar or a list of scalars, as a list.
template <class T>
std::vector<T> as_list(const json& j, const char* key) {
  if (j.is_array()) {
    if (j.empty()) throw std::invalid_argument(std::string(key) + " must not be empty");
    return j.get<std::vector<T>>();
  }
  return {j.get<T>()};
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

std::vector<TopologySpec> parse_topology(const json& j, int default_agents) {
  check_keys(j, {"kind", "L", "p", "p_range", "dims", "L_d"}, "topology");
  TopologySpec base;
  base.kind = parse_topology_kind(j.value("kind", std::string("random")));
  base.agents = j.value("L", default_agents);
  if (j.contains("p_range")) {
    const auto r = j.at("p_range").get<std::vector<double>>();
    if (r.size() != 2 || !(r[0] > 0.0 && r[0] <= r[1] && r[1] <= 1.0)) {
      throw std::invalid_argument("p_range must be [lo, hi] with 0 < lo <= hi <= 1");
    }
    base.p_range = std::pair{r[0], r[1]};
  }
  if (base.kind == TopologyKind::grid3d) {
    const auto d = j.at("dims").get<std::vector<int>>();
    if (d.size() != 3) throw std::invalid_argument("dims must have three extents");
    base.dims = {d[0], d[1], d[2]};
    base.agents = d[0] * d[1] * d[2];
  }

  std::vector<TopologySpec> out;
  const std::vector<int> imbalances =
      j.contains("L_d") ? as_list<int>(j.at("L_d"), "L_d") : std::vector<int>{0};
  const std::vector<std::optional<double>> ps = [&] {
    std::vector<std::optional<double>> v;
    if (j.contains("p")) {
      for (double p : as_list<double>(j.at("p"), "p")) v.emplace_back(p);
    } else {
      v.emplace_back(std::nullopt);
    }
    return v;
  }();
  for (int ld : imbalances) {
    for (const auto& p : ps) {
      TopologySpec t = base;
      t.imbalance = ld;
      t.p = p;
      if (p && t.p_range) throw std::invalid_argument("give either p or p_range, not both");
      if ((t.kind == TopologyKind::random || t.kind == TopologyKind::bipartite) && !t.p &&
          !t.p_range) {
        const double hi = t.kind == TopologyKind::bipartite
                              ? bipartite_max_ratio(t.agents, t.imbalance)
                              : 1.0;
        t.p_range = std::pair{2.0 / t.agents, hi};
      }
      out.push_back(t);
    }
  }
  return out;
}

std::string describe(const TopologySpec& t) {
  std::string s(to_string(t.kind));
  if (t.kind == TopologyKind::grid3d) {
    s += " " + std::to_string(t.dims[0]) + "x" + std::to_string(t.dims[1]) + "x" +
         std::to_string(t.dims[2]);
  } else {
    s += " L=" + std::to_string(t.agents);
  }
  if (t.kind == TopologyKind::bipartite) s += " L_d=" + std::to_string(t.imbalance);
  if (t.p) s += " p=" + csv::number(*t.p);
  if (t.p_range) {
    s += " p~U[" + csv::number(t.p_range->first) + ";" + csv::number(t.p_range->second) + "]";
  }
  return s;
}

std::vector<CSpec> parse_c(const json& j, ExperimentKind kind) {
  CSpec base;
  if (kind == ExperimentKind::c_sweep) base.policy = CPolicy::grid;
  if (kind == ExperimentKind::theta_sweep) base.policy = CPolicy::theta;
  if (j.is_null()) {
    if (base.policy != CPolicy::theta) return {base};
    std::vector<CSpec> out;
    for (double th : {0.25, 0.5, 0.75, 1.0}) {
      out.push_back(base);
      out.back().theta = th;
    }
    return out;
  }
  check_keys(j, {"policy", "theta", "value", "points", "lo", "hi"}, "c");
  const std::string policy = j.value("policy", std::string(base.policy == CPolicy::grid ? "grid"
                                                           : base.policy == CPolicy::theta
                                                               ? "theta"
                                                               : "c_t"));
  std::vector<CSpec> out;
  if (policy == "c_t") {
    base.policy = CPolicy::c_t;
    out.push_back(base);
  } else if (policy == "theta") {
    base.policy = CPolicy::theta;
    const std::vector<double> thetas = j.contains("theta")
                                           ? as_list<double>(j.at("theta"), "theta")
                                           : std::vector<double>{0.25, 0.5, 0.75, 1.0};
    for (double th : thetas) {
      if (!(th > 0.0)) throw std::invalid_argument("theta must be positive");
      out.push_back(base);
      out.back().theta = th;
    }
  } else if (policy == "value") {
    base.policy = CPolicy::value;
    for (double v : as_list<double>(j.at("value"), "value")) {
      if (!(v > 0.0)) throw std::invalid_argument("c value must be positive");
      out.push_back(base);
      out.back().value = v;
    }
  } else if (policy == "grid") {
    base.policy = CPolicy::grid;
    base.grid_points = j.value("points", base.grid_points);
    base.grid_lo = j.value("lo", base.grid_lo);
    base.grid_hi = j.value("hi", base.grid_hi);
    if (base.grid_points < 1 || !(base.grid_lo > 0.0) || !(base.grid_lo <= base.grid_hi)) {
      throw std::invalid_argument("grid needs points >= 1 and 0 < lo <= hi");
    }
    out.push_back(base);
  } else {
    throw std::invalid_argument("unknown c policy '" + policy + "'");
  }
  return out;
}

bool is_theoretical(const CSpec& c) {
  return c.policy == CPolicy::c_t || (c.policy == CPolicy::theta && c.theta == 1.0);
}

std::string trajectory_name(const ExperimentConfig& cfg, std::size_t point, std::uint64_t seed,
                            std::string_view method, std::optional<std::size_t> grid_index) {
  std::string s = "traj_" + cfg.hash + "_p" + std::to_string(point) + "_s" +
                  std::to_string(seed) + "_" + std::string(method);
  if (grid_index) s += "_c" + std::to_string(*grid_index);
  return s + ".csv";
}

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
  }
  return s;
}

struct JobOutput {
  std::vector<ResultRow> rows;
  std::vector<TrajectoryFile> trajectories;
  bool invariant_failure = false;
};

double draw_ratio(const TopologySpec& t, std::uint64_t seed) {
  if (t.p) return *t.p;
  Rng rng = make_rng(seed, "p");
  return std::uniform_real_distribution<double>(t.p_range->first, t.p_range->second)(rng);
}

JobOutput run_job(const ExperimentConfig& cfg, std::size_t point_index, std::uint64_t seed) {
  const PointSpec& point = cfg.points[point_index];
  JobOutput out;
  ResultRow base;
  base.experiment = cfg.id;
  base.point = point.label;
  base.seed = seed;
  base.method = "admm";
  base.topology = std::string(to_string(point.topology.kind));
  base.agents = point.topology.agents;
  if (point.c.policy == CPolicy::theta) base.theta = point.c.theta;
  if (point.topology.kind == TopologyKind::bipartite) base.imbalance = point.topology.imbalance;

  auto fail = [&](const std::string& status) {
    ResultRow row = base;
    row.status = sanitize(status);
    out.rows.push_back(std::move(row));
  };

  std::optional<Instance> inst;
  try {
    inst.emplace(build_instance(point, cfg.dim, cfg.noise_variance, seed));
  } catch (const InvariantViolation& e) {
    out.invariant_failure = true;
    fail(std::string("invariant: ") + e.what());
    return out;
  } catch (const std::exception& e) {
    fail(std::string("error: ") + e.what());
    return out;
  }

  const NetworkMetrics m = metrics(inst->topology);
  base.edges = inst->topology.edge_count();
  base.p = m.p;
  base.diameter = m.diameter;
  base.d_s = m.d_s;
  if (m.imbalance) base.imbalance = *m.imbalance;
  base.kappa_g = inst->spectra.kappa_g;
  base.kappa_f = inst->profile.kappa_f;
  const RateBundle rb = rate_bundle(inst->spectra, inst->profile);
  base.c_t = rb.c_t;
  base.rho_t = rb.rho_t;
  const double x_star_norm = inst->reference.x_star.norm();

  AdmmConfig admm;
  admm.max_iter = cfg.max_iter;
  admm.tol = cfg.tol;
  admm.stall_window = cfg.stall_window;
  admm.check_contraction = cfg.check_contraction;

  std::vector<double> cs;
  switch (point.c.policy) {
    case CPolicy::c_t: cs = {rb.c_t}; break;
    case CPolicy::theta: cs = {point.c.theta * rb.c_t}; break;
    case CPolicy::value: cs = {point.c.value}; break;
    case CPolicy::grid:
      cs = log_grid(point.c.grid_lo * rb.c_t, point.c.grid_hi * rb.c_t, point.c.grid_points);
      break;
  }
  const bool grid = point.c.policy == CPolicy::grid;

  std::vector<std::size_t> admm_rows;
  if (!point.with_admm) cs.clear();
  for (std::size_t gi = 0; gi < cs.size(); ++gi) {
    ResultRow row = base;
    row.c = cs[gi];
    try {
      admm.c = cs[gi];
      const AdmmRun run = dadmm::run(*inst, admm);
      row.rho_bar = run.rates.rho_bar_terminal;
      row.iterations = run.rates.iterations;
      row.terminal_error = run.rates.terminal_error;
      if (x_star_norm > 0.0) row.relative_error = run.rates.terminal_error / x_star_norm;
      if (is_theoretical(point.c) && row.rho_bar && *row.rho_bar > rb.rho_t + kRateSlack) {
        out.invariant_failure = true;
        row.status = "invariant: rho_bar " + csv::number(*row.rho_bar) + " exceeds rho_t " +
                     csv::number(rb.rho_t);
      }
      if (cfg.trajectories) {
        row.trajectory = trajectory_name(cfg, point_index, seed, "admm",
                                         grid ? std::optional(gi) : std::nullopt);
        out.trajectories.push_back({row.trajectory, run.rows});
      }
    } catch (const InvariantViolation& e) {
      out.invariant_failure = true;
      row.status = sanitize(std::string("invariant: ") + e.what());
    } catch (const std::exception& e) {
      row.status = sanitize(std::string("error: ") + e.what());
    }
    admm_rows.push_back(out.rows.size());
    out.rows.push_back(std::move(row));
  }

  if (grid) {
    // Same rule as best_practical_c, over the rows already computed.
    std::optional<std::size_t> best;
    for (std::size_t r : admm_rows) {
      const ResultRow& row = out.rows[r];
      if (row.status != "ok" || !row.rho_bar) continue;
      if (!best || *row.rho_bar < *out.rows[*best].rho_bar) best = r;
    }
    if (best) {
      for (std::size_t r : admm_rows) out.rows[r].c_star = out.rows[*best].c;
    }
  }

  if (point.with_dgd) {
    ResultRow row = base;
    row.method = "dgd";
    row.c.reset();
    row.c_t.reset();
    row.rho_t.reset();
    row.theta.reset();
    try {
      DgdOptions opts;
      opts.iters = cfg.dgd_iters > 0 ? cfg.dgd_iters : cfg.max_iter;
      const DgdRun run = run_dgd(*inst, opts);
      row.rho_bar = run.rates.rho_bar_terminal;
      row.iterations = run.rates.iterations;
      row.terminal_error = run.rates.terminal_error;
      if (x_star_norm > 0.0) row.relative_error = run.rates.terminal_error / x_star_norm;
      if (cfg.trajectories) {
        row.trajectory = trajectory_name(cfg, point_index, seed, "dgd", std::nullopt);
        out.trajectories.push_back({row.trajectory, run.rows});
      }
    } catch (const InvariantViolation& e) {
      out.invariant_failure = true;
      row.status = sanitize(std::string("invariant: ") + e.what());
    } catch (const std::exception& e) {
      row.status = sanitize(std::string("error: ") + e.what());
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  throw std::invalid_argument("unknown experiment kind");
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const json& j, std::optional<std::uint64_t> seed_override) {
  check_keys(j,
             {"experiment", "id", "L", "N", "topology", "topologies", "kappa_f", "c", "seeds",
              "max_iter", "tol", "stall_window", "noise_variance", "check_contraction",
              "trajectories", "dgd_iters", "threads", "kappa_g_bins"},
             "config");
  ExperimentConfig cfg;
  cfg.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
  cfg.id = j.value("id", std::string(to_string(cfg.kind)));
  cfg.dim = j.value("N", cfg.dim);
  cfg.max_iter = j.value("max_iter", cfg.max_iter);
  cfg.tol = j.value("tol", cfg.tol);
  cfg.stall_window = j.value("stall_window", cfg.stall_window);
  cfg.noise_variance = j.value("noise_variance", cfg.noise_variance);
  cfg.check_contraction = j.value("check_contraction", cfg.check_contraction);
  cfg.trajectories = j.value("trajectories", cfg.kind == ExperimentKind::linear_convergence ||
                                                 cfg.kind == ExperimentKind::dgd_compare ||
                                                 cfg.kind == ExperimentKind::c_sweep);
  cfg.dgd_iters = j.value("dgd_iters", cfg.dgd_iters);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.kappa_g_bins = j.value("kappa_g_bins", cfg.kappa_g_bins);
  cfg.hash = hex16(fnv1a(j.dump()));

  if (cfg.dim < 1) throw std::invalid_argument("N must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(cfg.tol >= 0.0)) throw std::invalid_argument("tol must be non-negative");
  if (cfg.stall_window < 0) throw std::invalid_argument("stall_window must be non-negative");
  if (!(cfg.noise_variance >= 0.0)) throw std::invalid_argument("noise_variance must be >= 0");
  if (cfg.kappa_g_bins < 1) throw std::invalid_argument("kappa_g_bins must be positive");
  if (cfg.id.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument("id must not contain commas, quotes or newlines");
  }

  if (seed_override) {
    cfg.seeds = {*seed_override};
  } else if (j.contains("seeds")) {
    cfg.seeds = as_list<std::uint64_t>(j.at("seeds"), "seeds");
  } else {
    throw std::invalid_argument("seeds must be given in the config or with --seed");
  }

  const int agents = j.value("L", 50);
  std::vector<TopologySpec> topologies;
  if (j.contains("topologies")) {
    if (!j.at("topologies").is_array() || j.at("topologies").empty()) {
      throw std::invalid_argument("topologies must be a non-empty list");
    }
    for (const json& t : j.at("topologies")) {
      for (TopologySpec& s : parse_topology(t, agents)) topologies.push_back(s);
    }
  } else {
    json t = j.value("topology", json::object());
    if (cfg.kind == ExperimentKind::bipartite_study && !t.contains("kind")) t["kind"] = "bipartite";
    topologies = parse_topology(t, agents);
  }

  std::vector<std::optional<double>> kappas{std::nullopt};
  if (j.contains("kappa_f")) {
    kappas.clear();
    for (double k : as_list<double>(j.at("kappa_f"), "kappa_f")) {
      if (!(k >= 1.0)) throw std::invalid_argument("kappa_f must be >= 1");
      kappas.emplace_back(k);
    }
  } else if (cfg.kind == ExperimentKind::kappa_f_sweep) {
    throw std::invalid_argument("kappa_f_sweep needs a kappa_f list");
  }
  const std::vector<CSpec> cspecs = parse_c(j.value("c", json()), cfg.kind);

  for (const TopologySpec& t : topologies) {
    if (cfg.kind == ExperimentKind::bipartite_study && t.kind != TopologyKind::bipartite) {
      throw std::invalid_argument("bipartite_study needs bipartite topologies");
    }
    for (const auto& k : kappas) {
      for (const CSpec& c : cspecs) {
        PointSpec p;
        p.topology = t;
        p.kappa_f = k;
        p.c = c;
        p.with_dgd = cfg.kind == ExperimentKind::dgd_compare;
        p.label = describe(t);
        if (k) p.label += " kappa_f=" + csv::number(*k);
        if (c.policy == CPolicy::theta) p.label += " theta=" + csv::number(c.theta);
        if (c.policy == CPolicy::value) p.label += " c=" + csv::number(c.value);
        cfg.points.push_back(std::move(p));
      }
    }
  }
  return cfg;
}

Topology build_topology(const TopologySpec& t, std::uint64_t seed) {
  const std::uint64_t topo_seed = substream_seed(seed, "topology");
  switch (t.kind) {
    case TopologyKind::random:
      return random_connected(t.agents, draw_ratio(t, seed), topo_seed);
    case TopologyKind::bipartite:
      return bipartite(t.agents, t.imbalance, draw_ratio(t, seed), topo_seed);
    case TopologyKind::grid3d:
      return grid3d(t.dims[0], t.dims[1], t.dims[2]);
    default:
      return special(t.kind, t.agents);
  }
}

Instance build_instance(const PointSpec& point, int dim, double noise_variance,
                        std::uint64_t seed) {
  Topology t = build_topology(point.topology, seed);
  ObjectiveSet f = generate(t.agents(), dim, seed, noise_variance);
  if (point.kappa_f) f = shape_condition(f, *point.kappa_f);
  return Instance::build(std::move(t), f);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (points < 1 || !(lo > 0.0) || !(lo <= hi)) {
    throw std::invalid_argument("log grid needs points >= 1 and 0 < lo <= hi");
  }
  if (points == 1) return {lo};
  std::vector<double> g(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

CStar best_practical_c(const Instance& inst, const std::vector<double>& grid,
                       const AdmmConfig& base) {
  if (grid.empty()) throw std::invalid_argument("c grid must not be empty");
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

  CStar out;
  for (std::size_t i : order) {
    AdmmConfig cfg = base;
    cfg.c = grid[i];
    cfg.check_contraction = false;
    const double rb = run(inst, cfg).rates.rho_bar_terminal;
    out.grid.push_back(grid[i]);
    out.rho_bars.push_back(rb);
    if (out.grid.size() == 1 || rb < out.rho_bar) {
      out.rho_bar = rb;
      out.c_star = grid[i];
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds must not be empty");
  const std::size_t jobs = cfg.points.size() * cfg.seeds.size();
  std::vector<JobOutput> outputs(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      outputs[i] = run_job(cfg, i / cfg.seeds.size(), cfg.seeds[i % cfg.seeds.size()]);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads =
      std::min<std::size_t>(jobs, cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ExperimentResult result;
  for (JobOutput& o : outputs) {
    result.invariant_failure = result.invariant_failure || o.invariant_failure;
    for (ResultRow& r : o.rows) result.rows.push_back(std::move(r));
    for (TrajectoryFile& t : o.trajectories) result.trajectories.push_back(std::move(t));
  }
  return result;
}

void write_result_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
  using csv::number;
  auto integer = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  out << "experiment,point,seed,method,topology,L,E,p,kappa_G,kappa_f,c_t,c,theta,c_star,"
         "rho_bar,rho_t,iterations,terminal_error,relative_error,D,d_s,L_d,trajectory,status\n";
  for (const ResultRow& r : rows) {
    out << csv::join({r.experiment, r.point, std::to_string(r.seed), r.method, r.topology,
                      std::to_string(r.agents), std::to_string(r.edges), number(r.p),
                      number(r.kappa_g), number(r.kappa_f), number(r.c_t), number(r.c),
                      number(r.theta), number(r.c_star), number(r.rho_bar), number(r.rho_t),
                      integer(r.iterations), number(r.terminal_error), number(r.relative_error),
                      integer(r.diameter), number(r.d_s), integer(r.imbalance), r.trajectory,
                      r.status})
        << '\n';
  }
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "k,err_x,err_u_G2,rho_k,rho_bar_k\n";
  for (const TrajectoryRow& r : rows) {
    out << csv::join({std::to_string(r.k), csv::number(r.err_x), csv::number(r.err_u_g2),
                      csv::number(r.rho_k), csv::number(r.rho_bar_k)})
        << '\n';
  }
}

void write_kappa_g_summary(std::ostream& out, const std::vector<ResultRow>& rows, int bins) {
  if (bins < 1) throw std::invalid_argument("bins must be positive");
  std::vector<const ResultRow*> ok;
  for (const ResultRow& r : rows) {
    if (r.method == "admm" && r.status == "ok" && r.kappa_g && r.rho_bar) ok.push_back(&r);
  }
  out << "point,bin,kappa_G_lo,kappa_G_hi,count,rho_bar_min,rho_bar_mean,rho_bar_max,"
         "rho_t_mean\n";
  if (ok.empty()) return;
  double lo = std::log(*ok.front()->kappa_g);
  double hi = lo;
  for (const ResultRow* r : ok) {
    lo = std::min(lo, std::log(*r->kappa_g));
    hi = std::max(hi, std::log(*r->kappa_g));
  }
  const double width = hi > lo ? (hi - lo) / bins : 1.0;

  struct Acc {
    int count = 0;
    double min = 0, max = 0, sum = 0, rho_t_sum = 0;
  };
  // Points keep their first-appearance order.
  std::vector<std::string> points;
  std::map<std::pair<std::string, int>, Acc> acc;
  for (const ResultRow* r : ok) {
    if (std::find(points.begin(), points.end(), r->point) == points.end()) points.push_back(r->point);
    const int b = std::clamp(static_cast<int>((std::log(*r->kappa_g) - lo) / width), 0, bins - 1);
    Acc& a = acc[{r->point, b}];
    if (a.count == 0) a.min = a.max = *r->rho_bar;
    a.min = std::min(a.min, *r->rho_bar);
    a.max = std::max(a.max, *r->rho_bar);
    a.sum += *r->rho_bar;
    a.rho_t_sum += r->rho_t.value_or(0.0);
    ++a.count;
  }
  for (const std::string& p : points) {
    for (int b = 0; b < bins; ++b) {
      const auto it = acc.find({p, b});
      if (it == acc.end()) continue;
      const Acc& a = it->second;
      out << csv::join({p, std::to_string(b), csv::number(std::exp(lo + b * width)),
                        csv::number(std::exp(lo + (b + 1) * width)), std::to_string(a.count),
                        csv::number(a.min), csv::number(a.sum / a.count), csv::number(a.max),
                        csv::number(a.rho_t_sum / a.count)})
          << '\n';
    }
  }
}

void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                      const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    std::ofstream f = open("results.csv");
    write_result_rows(f, result.rows);
  }
  for (const TrajectoryFile& t : result.trajectories) {
    std::ofstream f = open(t.name);
    write_trajectory(f, t.rows);
  }
  if (cfg.kind == ExperimentKind::theta_sweep || cfg.kind == ExperimentKind::topology_study ||
      cfg.kind == ExperimentKind::bipartite_study || cfg.kind == ExperimentKind::kappa_f_sweep) {
    std::ofstream f = open("kappa_g_summary.csv");
    write_kappa_g_summary(f, result.rows, cfg.kappa_g_bins);
  }
}

}  // namespace dadmm
