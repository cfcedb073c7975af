#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dadmm/csv.hpp"
#include "dadmm/errors.hpp"
#include "dadmm/experiment.hpp"
#include "dadmm/objectives.hpp"
#include "dadmm/rates.hpp"
#include "dadmm/spectral.hpp"
#include "dadmm/topology.hpp"

namespace fs = std::filesystem;
using namespace dadmm;

namespace {

constexpr int kUsageError = 1;
constexpr int kInvariantFailure = 2;

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "run this seed only");
}

ExperimentConfig load(const Common& c) {
  std::ifstream in(c.config);
  if (!in) throw std::invalid_argument("cannot read " + c.config);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(c.config + ": " + e.what());
  }
  try {
    return parse_config(j, c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(c.config + ": " + e.what());
  }
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out) / name).string());
  return f;
}

int gen_graph(const Common& c) {
  const ExperimentConfig cfg = load(c);
  std::ofstream table = open_out(c, "graphs.csv");
  table << "point,seed,topology_hash,file,kind,L,E,p,D,d_min,d_max,d_s,L_d\n";
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    for (std::uint64_t seed : cfg.seeds) {
      const Topology t = build_topology(cfg.points[i].topology, seed);
      const NetworkMetrics m = metrics(t);
      const std::string file = "graph_p" + std::to_string(i) + "_s" + std::to_string(seed) + ".txt";
      std::ofstream g = open_out(c, file);
      write_edge_list(g, t);
      table << csv::join({cfg.points[i].label, std::to_string(seed), t.fingerprint(), file,
                          std::string(to_string(t.kind())), std::to_string(t.agents()),
                          std::to_string(t.edge_count()), csv::number(m.p),
                          std::to_string(m.diameter), std::to_string(m.d_min),
                          std::to_string(m.d_max), csv::number(m.d_s),
                          m.imbalance ? std::to_string(*m.imbalance) : std::string()})
            << '\n';
    }
  }
  return 0;
}

int spectra_cmd(const Common& c) {
  const ExperimentConfig cfg = load(c);
  std::ofstream table = open_out(c, "spectra.csv");
  table << "topology_hash,point,seed,L,E,lam_max_Lplus,lam_tmin_Lminus,kappa_G\n";
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    for (std::uint64_t seed : cfg.seeds) {
      const Topology t = build_topology(cfg.points[i].topology, seed);
      const GraphSpectra g = spectra(build_incidence(t, 1));
      table << csv::join({t.fingerprint(), cfg.points[i].label, std::to_string(seed),
                          std::to_string(t.agents()), std::to_string(t.edge_count()),
                          csv::number(g.lam_max_lplus), csv::number(g.lam_tmin_lminus),
                          csv::number(g.kappa_g)})
            << '\n';
    }
  }
  return 0;
}

int rates_cmd(const Common& c) {
  const ExperimentConfig cfg = load(c);
  std::ofstream table = open_out(c, "rates.csv");
  table << "topology_hash,point,seed,kappa_G,kappa_f,c_t,mu_star,delta_t,rho_t\n";
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const PointSpec& point = cfg.points[i];
    for (std::uint64_t seed : cfg.seeds) {
      const Topology t = build_topology(point.topology, seed);
      const GraphSpectra g = spectra(build_incidence(t, 1));
      ObjectiveSet f = generate(t.agents(), cfg.dim, seed, cfg.noise_variance);
      if (point.kappa_f) f = shape_condition(f, *point.kappa_f);
      const ObjectiveProfile prof = profile(f);
      const RateBundle rb = rate_bundle(g, prof);
      table << csv::join({t.fingerprint(), point.label, std::to_string(seed),
                          csv::number(g.kappa_g), csv::number(prof.kappa_f), csv::number(rb.c_t),
                          csv::number(rb.mu_star), csv::number(rb.delta_t),
                          csv::number(rb.rho_t)})
            << '\n';
    }
  }
  return 0;
}

// run-admm and run-dgd restrict the configured experiment to one method and
// always keep trajectories.
int run_cmd(const Common& c, std::optional<bool> admm_only) {
  ExperimentConfig cfg = load(c);
  if (admm_only) {
    cfg.trajectories = true;
    for (PointSpec& p : cfg.points) {
      p.with_admm = *admm_only;
      p.with_dgd = !*admm_only;
    }
  }
  const ExperimentResult result = run_experiment(cfg);
  write_experiment(c.out, cfg, result);
  std::size_t failed = 0;
  for (const ResultRow& r : result.rows) {
    if (r.status != "ok") {
      ++failed;
      std::cerr << r.point << " seed " << r.seed << ": " << r.status << '\n';
    }
  }
  std::cerr << result.rows.size() << " rows, " << failed << " failed, written to " << c.out
            << '\n';
  return result.invariant_failure ? kInvariantFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized consensus ADMM simulator"};
  app.require_subcommand(1);
  Common common;

  CLI::App* gen = app.add_subcommand("gen-graph", "write the configured topologies as edge lists");
  CLI::App* spec = app.add_subcommand("spectra", "Laplacian spectra and kappa_G per topology");
  CLI::App* rates = app.add_subcommand("rates", "theoretical penalty and rate bound per instance");
  CLI::App* admm = app.add_subcommand("run-admm", "ADMM runs with trajectories");
  CLI::App* dgd = app.add_subcommand("run-dgd", "DGD runs with trajectories");
  CLI::App* sweep = app.add_subcommand("sweep", "run the configured experiment");
  for (CLI::App* sub : {gen, spec, rates, admm, dgd, sweep}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) return gen_graph(common);
    if (*spec) return spectra_cmd(common);
    if (*rates) return rates_cmd(common);
    if (*admm) return run_cmd(common, true);
    if (*dgd) return run_cmd(common, false);
    return run_cmd(common, std::nullopt);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kInvariantFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}
