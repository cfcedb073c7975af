#include "dadmm/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dadmm/rng.hpp"

namespace dadmm {

namespace {

constexpr std::array<std::pair<TopologyKind, std::string_view>, 7> kKindNames{{
    {TopologyKind::random, "random"},
    {TopologyKind::line, "line"},
    {TopologyKind::cycle, "cycle"},
    {TopologyKind::star, "star"},
    {TopologyKind::complete, "complete"},
    {TopologyKind::grid3d, "grid3d"},
    {TopologyKind::bipartite, "bipartite"},
}};

// Hop distances from `source`; -1 marks unreachable agents.
std::vector<int> bfs_distances(const Topology& t, int source) {
  std::vector<int> dist(t.agents(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : t.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

// Two-coloring of a connected graph; empty if an odd cycle exists.
std::vector<int> two_coloring(const Topology& t) {
  std::vector<int> color(t.agents(), -1);
  std::deque<int> queue{0};
  color[0] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : t.neighbors(u)) {
      if (color[w] < 0) {
        color[w] = 1 - color[u];
        queue.push_back(w);
      } else if (color[w] == color[u]) {
        return {};
      }
    }
  }
  return color;
}

// Wilson's algorithm over an implicit graph given by a neighbor sampler.
template <typename NeighborSampler>
std::vector<Edge> uniform_spanning_tree(int n, int root, NeighborSampler&& random_neighbor,
                                        Rng& rng) {
  std::vector<char> in_tree(n, 0);
  std::vector<int> next(n, -1);
  in_tree[root] = 1;
  for (int start = 0; start < n; ++start) {
    int u = start;
    while (!in_tree[u]) {
      next[u] = random_neighbor(u, rng);
      u = next[u];
    }
    u = start;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      u = next[u];
    }
  }
  std::vector<Edge> tree;
  tree.reserve(n - 1);
  for (int u = 0; u < n; ++u) {
    if (u != root) tree.push_back({std::min(u, next[u]), std::max(u, next[u])});
  }
  return tree;
}

// Adds `extra` edges drawn uniformly without replacement from `candidates`
// that are not already in `edges`.
void add_random_edges(int n, std::vector<Edge>& edges, const std::vector<Edge>& candidates,
                      std::size_t extra, Rng& rng) {
  std::vector<char> taken(static_cast<std::size_t>(n) * n, 0);
  for (const Edge& e : edges) taken[static_cast<std::size_t>(e.i) * n + e.j] = 1;
  std::vector<Edge> pool;
  pool.reserve(candidates.size());
  for (const Edge& e : candidates) {
    if (!taken[static_cast<std::size_t>(e.i) * n + e.j]) pool.push_back(e);
  }
  if (extra > pool.size()) throw std::invalid_argument("not enough candidate edges");
  for (std::size_t s = 0; s < extra; ++s) {
    std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
    std::swap(pool[s], pool[pick(rng)]);
    edges.push_back(pool[s]);
  }
}

}  // namespace

std::string_view to_string(TopologyKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown topology kind: " + std::string(name));
}

Topology::Topology(int agents, std::vector<Edge> edges, TopologyKind kind)
    : agents_(agents), kind_(kind), edges_(std::move(edges)) {
  if (agents_ < 1) throw std::invalid_argument("topology needs at least one agent");
  for (Edge& e : edges_) {
    if (e.i == e.j) throw std::invalid_argument("self-loop at agent " + std::to_string(e.i));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.j >= agents_) throw std::invalid_argument("edge endpoint out of range");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw std::invalid_argument("duplicate edge");
  }

  adjacency_.assign(agents_, {});
  for (const Edge& e : edges_) {
    adjacency_[e.i].push_back(e.j);
    adjacency_[e.j].push_back(e.i);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());

  arcs_.reserve(2 * edges_.size());
  for (const Edge& e : edges_) {
    arcs_.push_back({e.i, e.j});
    arcs_.push_back({e.j, e.i});
  }
  std::sort(arcs_.begin(), arcs_.end());

  const auto dist = bfs_distances(*this, 0);
  if (std::find(dist.begin(), dist.end(), -1) != dist.end()) {
    throw std::invalid_argument("topology is not connected");
  }
  if (kind_ == TopologyKind::bipartite && two_coloring(*this).empty()) {
    throw std::invalid_argument("topology labelled bipartite has an odd cycle");
  }
}

std::string Topology::fingerprint() const {
  std::ostringstream os;
  write_edge_list(os, *this);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

int target_edge_count(int agents, double p) {
  const double pairs = 0.5 * agents * (agents - 1.0);
  return static_cast<int>(std::floor(p * pairs + 0.5));
}

Topology random_connected(int agents, double p, std::uint64_t seed) {
  if (agents < 2) throw std::invalid_argument("random_connected needs L >= 2");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("connectivity ratio must lie in (0, 1]");
  const int target = target_edge_count(agents, p);
  if (target < agents - 1) {
    throw std::invalid_argument("connectivity ratio below the spanning-tree threshold");
  }

  Rng rng(seed);
  std::uniform_int_distribution<int> any_agent(0, agents - 1);
  const int root = any_agent(rng);
  auto step = [agents](int u, Rng& r) {
    std::uniform_int_distribution<int> other(0, agents - 2);
    const int w = other(r);
    return w >= u ? w + 1 : w;
  };
  std::vector<Edge> edges = uniform_spanning_tree(agents, root, step, rng);

  std::vector<Edge> all_pairs;
  all_pairs.reserve(static_cast<std::size_t>(agents) * (agents - 1) / 2);
  for (int i = 0; i < agents; ++i) {
    for (int j = i + 1; j < agents; ++j) all_pairs.push_back({i, j});
  }
  add_random_edges(agents, edges, all_pairs, target - (agents - 1), rng);
  return Topology(agents, std::move(edges), TopologyKind::random);
}

Topology special(TopologyKind kind, int agents) {
  std::vector<Edge> edges;
  switch (kind) {
    case TopologyKind::line:
    case TopologyKind::cycle:
      if (agents < (kind == TopologyKind::cycle ? 3 : 2)) {
        throw std::invalid_argument(std::string(to_string(kind)) + " needs more agents");
      }
      for (int i = 0; i + 1 < agents; ++i) edges.push_back({i, i + 1});
      if (kind == TopologyKind::cycle) edges.push_back({0, agents - 1});
      break;
    case TopologyKind::star:
      if (agents < 2) throw std::invalid_argument("star needs L >= 2");
      for (int i = 1; i < agents; ++i) edges.push_back({0, i});
      break;
    case TopologyKind::complete:
      if (agents < 2) throw std::invalid_argument("complete needs L >= 2");
      for (int i = 0; i < agents; ++i) {
        for (int j = i + 1; j < agents; ++j) edges.push_back({i, j});
      }
      break;
    default:
      throw std::invalid_argument("special() supports line, cycle, star, complete");
  }
  return Topology(agents, std::move(edges), kind);
}

Topology grid3d(int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1 || nx * ny * nz < 2) {
    throw std::invalid_argument("grid extents must be positive with at least two points");
  }
  auto index = [&](int x, int y, int z) { return x + nx * (y + ny * z); };
  std::vector<Edge> edges;
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const int here = index(x, y, z);
        if (x + 1 < nx) edges.push_back({here, index(x + 1, y, z)});
        if (y + 1 < ny) edges.push_back({here, index(x, y + 1, z)});
        if (z + 1 < nz) edges.push_back({here, index(x, y, z + 1)});
      }
    }
  }
  return Topology(nx * ny * nz, std::move(edges), TopologyKind::grid3d);
}

double bipartite_max_ratio(int agents, int imbalance) {
  return static_cast<double>(agents + imbalance) * (agents - imbalance) /
         (2.0 * agents * (agents - 1.0));
}

Topology bipartite(int agents, int imbalance, double p, std::uint64_t seed) {
  if (agents < 2) throw std::invalid_argument("bipartite needs L >= 2");
  if ((agents + imbalance) % 2 != 0 || imbalance < 0 || imbalance > agents - 2) {
    throw std::invalid_argument("bipartite imbalance must satisfy 0 <= L_d <= L-2, L+L_d even");
  }
  const int size_a = (agents + imbalance) / 2;
  const int size_b = agents - size_a;
  const int target = target_edge_count(agents, p);
  if (target < agents - 1 || target > size_a * size_b) {
    throw std::invalid_argument("connectivity ratio infeasible for this bipartite imbalance");
  }

  Rng rng(seed);
  auto step = [size_a, size_b](int u, Rng& r) {
    if (u < size_a) {
      std::uniform_int_distribution<int> pick(0, size_b - 1);
      return size_a + pick(r);
    }
    std::uniform_int_distribution<int> pick(0, size_a - 1);
    return pick(r);
  };
  std::uniform_int_distribution<int> any_agent(0, agents - 1);
  const int root = any_agent(rng);
  std::vector<Edge> edges = uniform_spanning_tree(agents, root, step, rng);

  std::vector<Edge> cross;
  cross.reserve(static_cast<std::size_t>(size_a) * size_b);
  for (int i = 0; i < size_a; ++i) {
    for (int j = size_a; j < agents; ++j) cross.push_back({i, j});
  }
  add_random_edges(agents, edges, cross, target - (agents - 1), rng);
  return Topology(agents, std::move(edges), TopologyKind::bipartite);
}

NetworkMetrics metrics(const Topology& t) {
  const int n = t.agents();
  NetworkMetrics m;
  m.p = n > 1 ? t.edge_count() / (0.5 * n * (n - 1.0)) : 1.0;
  for (int s = 0; s < n; ++s) {
    const auto dist = bfs_distances(t, s);
    for (int d : dist) {
      if (d < 0) throw std::invalid_argument("metrics on a disconnected topology");
      m.diameter = std::max(m.diameter, d);
    }
  }
  m.d_min = n;
  for (int i = 0; i < n; ++i) {
    m.d_min = std::min(m.d_min, t.degree(i));
    m.d_max = std::max(m.d_max, t.degree(i));
  }
  m.d_s = std::sqrt(static_cast<double>(m.d_min) * m.d_max);
  if (t.kind() == TopologyKind::bipartite) {
    const auto color = two_coloring(t);
    const auto ones = std::count(color.begin(), color.end(), 1);
    m.imbalance = static_cast<int>(std::abs(n - 2 * ones));
  }
  return m;
}

void write_edge_list(std::ostream& out, const Topology& t) {
  out << t.agents() << ' ' << t.edge_count() << ' ' << to_string(t.kind()) << '\n';
  for (const Edge& e : t.edges()) out << e.i << ' ' << e.j << '\n';
}

Topology read_edge_list(std::istream& in) {
  int agents = 0;
  int count = 0;
  std::string kind;
  if (!(in >> agents >> count >> kind)) throw std::invalid_argument("malformed edge-list header");
  std::vector<Edge> edges(count);
  for (Edge& e : edges) {
    if (!(in >> e.i >> e.j)) throw std::invalid_argument("truncated edge list");
  }
  return Topology(agents, std::move(edges), parse_topology_kind(kind));
}

}  // namespace dadmm
