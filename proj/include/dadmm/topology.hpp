#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dadmm {

enum class TopologyKind { random, line, cycle, star, complete, grid3d, bipartite };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view name);

// Undirected edge with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Directed arc (from, to). Every edge contributes (i, j) and (j, i).
struct Arc {
  int from = 0;
  int to = 0;
  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/// Connected undirected communication graph over agents 0..L-1.
///
/// Construction validates the invariants: no self-loops, no duplicate edges,
/// connectivity. Edges are stored normalized (i < j) and sorted, so two
/// topologies with the same edge set compare equal regardless of input order.
class Topology {
 public:
  Topology(int agents, std::vector<Edge> edges, TopologyKind kind);

  int agents() const { return agents_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int arc_count() const { return 2 * edge_count(); }
  TopologyKind kind() const { return kind_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const int> neighbors(int agent) const { return adjacency_[agent]; }
  int degree(int agent) const { return static_cast<int>(adjacency_[agent].size()); }

  // Both orientations of every edge, sorted lexicographically. This fixes the
  // column order of the incidence matrices and the row order of z and beta.
  const std::vector<Arc>& arcs() const { return arcs_; }

  // Stable 16-hex-digit key derived from the serialized edge list.
  std::string fingerprint() const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.agents_ == b.agents_ && a.kind_ == b.kind_ && a.edges_ == b.edges_;
  }

 private:
  int agents_;
  TopologyKind kind_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<Arc> arcs_;
};

struct NetworkMetrics {
  double p = 0.0;  // connectivity ratio E / (L(L-1)/2)
  int diameter = 0;
  int d_min = 0;
  int d_max = 0;
  double d_s = 0.0;  // sqrt(d_min * d_max)
  std::optional<int> imbalance;  // |L_A| - |L_B|, bipartite label only
};

// Edge count for connectivity ratio p, rounded half up.
int target_edge_count(int agents, double p);

/// Random connected graph with exactly target_edge_count(L, p) edges.
///
/// A uniform spanning tree is drawn with Wilson's loop-erased random walk,
/// then the remaining edges are sampled uniformly without replacement from
/// the non-tree pairs. This is close to, but not exactly, uniform over
/// connected graphs with that edge count.
Topology random_connected(int agents, double p, std::uint64_t seed);

// line | cycle | star | complete.
Topology special(TopologyKind kind, int agents);

// Agents on the integer lattice nx x ny x nz, edges at Manhattan distance 1.
Topology grid3d(int nx, int ny, int nz);

// Random connected bipartite graph with groups of (L+L_d)/2 and (L-L_d)/2
// agents; agents 0..(L+L_d)/2-1 form the first group.
Topology bipartite(int agents, int imbalance, double p, std::uint64_t seed);

// Largest admissible connectivity ratio for a bipartite graph.
double bipartite_max_ratio(int agents, int imbalance);

NetworkMetrics metrics(const Topology& t);

// Edge-list text: header "L E kind", then one "i j" line per edge.
void write_edge_list(std::ostream& out, const Topology& t);
Topology read_edge_list(std::istream& in);

}  // namespace dadmm
