#pragma once

// Regular graphs, their self-loop-augmented balancing graphs, and the
// BFS-based queries (diameter, odd girth, distance labelings) the
// experiments rely on. Graphs are immutable after construction and stored
// as sorted neighbor lists; self-loops exist only in BalancingGraph.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffbal/rng.hpp"

namespace diffbal {

struct RegularGraph {
  int n = 0;
  int degree = 0;
  std::vector<std::vector<int>> adj;  // sorted, symmetric, no self-entries
};

// Throws std::invalid_argument when the adjacency is not a simple
// d-regular symmetric graph.
inline void validate(const RegularGraph& g) {
  if (g.n < 1 || static_cast<int>(g.adj.size()) != g.n)
    throw std::invalid_argument("graph: node count mismatch");
  for (int u = 0; u < g.n; ++u) {
    const auto& nb = g.adj[u];
    if (static_cast<int>(nb.size()) != g.degree)
      throw std::invalid_argument("graph: node " + std::to_string(u) +
                                  " does not have degree " + std::to_string(g.degree));
    for (std::size_t i = 0; i < nb.size(); ++i) {
      int v = nb[i];
      if (v < 0 || v >= g.n) throw std::invalid_argument("graph: neighbor out of range");
      if (v == u) throw std::invalid_argument("graph: self-entry in adjacency");
      if (i > 0 && nb[i - 1] >= v)
        throw std::invalid_argument("graph: neighbors not strictly ascending");
      if (!std::binary_search(g.adj[v].begin(), g.adj[v].end(), u))
        throw std::invalid_argument("graph: adjacency not symmetric at edge " +
                                    std::to_string(u) + "-" + std::to_string(v));
    }
  }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

inline RegularGraph make_cycle(int n) {
  if (n < 3) throw std::invalid_argument("make_cycle: n must be >= 3");
  RegularGraph g{n, 2, std::vector<std::vector<int>>(n)};
  for (int i = 0; i < n; ++i) {
    g.adj[i] = {(i + n - 1) % n, (i + 1) % n};
    std::sort(g.adj[i].begin(), g.adj[i].end());
  }
  return g;
}

// r-dimensional torus with side^r nodes; nodes are mixed-radix tuples and
// neighbors differ by +-1 (mod side) in one coordinate. 2r-regular.
inline RegularGraph make_torus(int side, int r) {
  if (side < 3) throw std::invalid_argument("make_torus: side must be >= 3");
  if (r < 1) throw std::invalid_argument("make_torus: dimension must be >= 1");
  std::int64_t count = 1;
  for (int i = 0; i < r; ++i) {
    count *= side;
    if (count > (1 << 20)) throw std::invalid_argument("make_torus: too many nodes");
  }
  const int n = static_cast<int>(count);
  RegularGraph g{n, 2 * r, std::vector<std::vector<int>>(n)};
  std::int64_t stride = 1;
  for (int dim = 0; dim < r; ++dim) {
    for (int u = 0; u < n; ++u) {
      int coord = static_cast<int>((u / stride) % side);
      int up = static_cast<int>(u + ((coord + 1) % side - coord) * stride);
      int down = static_cast<int>(u + ((coord + side - 1) % side - coord) * stride);
      g.adj[u].push_back(up);
      g.adj[u].push_back(down);
    }
    stride *= side;
  }
  for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
  return g;
}

inline RegularGraph make_hypercube(int dim) {
  if (dim < 1) throw std::invalid_argument("make_hypercube: dim must be >= 1");
  if (dim > 20) throw std::invalid_argument("make_hypercube: dim too large");
  const int n = 1 << dim;
  RegularGraph g{n, dim, std::vector<std::vector<int>>(n)};
  for (int u = 0; u < n; ++u) {
    for (int b = 0; b < dim; ++b) g.adj[u].push_back(u ^ (1 << b));
    std::sort(g.adj[u].begin(), g.adj[u].end());
  }
  return g;
}

inline bool is_connected(const RegularGraph& g) {
  if (g.n == 0) return false;
  std::vector<char> seen(g.n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
  }
  return reached == g.n;
}

// Pairing-model generator: match n*d half-edge stubs uniformly at random,
// retry whenever the matching produces a self-loop or multi-edge, and retry
// the whole draw until the result is connected. Deterministic per seed.
inline RegularGraph make_random_regular(int n, int d, std::uint64_t seed,
                                        int max_attempts = 20000) {
  if (n < 1 || d < 0 || d >= n)
    throw std::invalid_argument("make_random_regular: need 0 <= d < n");
  if ((static_cast<std::int64_t>(n) * d) % 2 != 0)
    throw std::invalid_argument("make_random_regular: n*d must be even");
  if (d == 0 && n > 1)
    throw std::invalid_argument("make_random_regular: 0-regular graph cannot be connected");

  SplitMix64 rng(seed);
  std::vector<int> stubs(static_cast<std::size_t>(n) * d);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < stubs.size(); ++i) stubs[i] = static_cast<int>(i / d);
    fisher_yates(stubs, rng);
    RegularGraph g{n, d, std::vector<std::vector<int>>(n)};
    bool simple = true;
    for (std::size_t i = 0; i + 1 < stubs.size() && simple; i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v) {
        simple = false;
        break;
      }
      for (int w : g.adj[u])
        if (w == v) {
          simple = false;
          break;
        }
      if (simple) {
        g.adj[u].push_back(v);
        g.adj[v].push_back(u);
      }
    }
    if (!simple) continue;
    for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
    if (!is_connected(g)) continue;
    return g;
  }
  throw std::runtime_error("make_random_regular: retry budget exceeded");
}

// Circulant graph containing a floor(d/2)-clique C = {0..floor(d/2)-1}:
// i ~ j iff (i-j) mod n in {+-1..+-floor(d/2)}, plus the antipode n/2
// when d is odd.
inline RegularGraph make_circulant_clique(int n, int d) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("make_circulant_clique: n must be even and >= 2");
  if (d < 1 || 2 * (d / 2) >= n)
    throw std::invalid_argument("make_circulant_clique: need 2*floor(d/2) < n");
  RegularGraph g{n, d, std::vector<std::vector<int>>(n)};
  for (int u = 0; u < n; ++u) {
    for (int k = 1; k <= d / 2; ++k) {
      g.adj[u].push_back((u + k) % n);
      g.adj[u].push_back((u + n - k) % n);
    }
    if (d % 2 == 1) g.adj[u].push_back((u + n / 2) % n);
    std::sort(g.adj[u].begin(), g.adj[u].end());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Balancing graph (self-loop augmentation)
// ---------------------------------------------------------------------------

// Canonical port order of a node: its d original edges in ascending neighbor
// order on ports 0..d-1, then d_loops self-loops. The port order is fixed so
// rotor trajectories and ledgers reproduce exactly; adversarial orderings are
// expressed as explicit per-node permutations in BalancerState.
struct BalancingGraph {
  RegularGraph base;
  int d_loops = 0;

  int n() const { return base.n; }
  int degree() const { return base.degree; }
  int d_plus() const { return base.degree + d_loops; }
  bool is_loop_port(int p) const { return p >= base.degree; }
  int port_target(int u, int p) const { return p < base.degree ? base.adj[u][p] : u; }
};

inline BalancingGraph augment(RegularGraph g, int d_loops) {
  if (d_loops < 0) throw std::invalid_argument("augment: d_loops must be >= 0");
  validate(g);
  return BalancingGraph{std::move(g), d_loops};
}

// ---------------------------------------------------------------------------
// BFS queries
// ---------------------------------------------------------------------------

inline std::vector<int> bfs_distances(const RegularGraph& g, int source) {
  if (source < 0 || source >= g.n) throw std::invalid_argument("bfs: source out of range");
  std::vector<int> dist(g.n, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist;
}

struct DistanceLabeling {
  int source = 0;
  std::vector<int> dist;  // dist[source] == 0, adjacent labels differ by <= 1
};

inline DistanceLabeling distance_labeling(const RegularGraph& g, int source) {
  DistanceLabeling lab{source, bfs_distances(g, source)};
  for (int v : lab.dist)
    if (v < 0) throw std::runtime_error("distance_labeling: graph is disconnected");
  return lab;
}

inline int eccentricity(const RegularGraph& g, int source) {
  auto lab = distance_labeling(g, source);
  return *std::max_element(lab.dist.begin(), lab.dist.end());
}

inline int diameter(const RegularGraph& g) {
  int best = 0;
  for (int s = 0; s < g.n; ++s) best = std::max(best, eccentricity(g, s));
  return best;
}

struct OddGirthInfo {
  int length;  // 2*phi + 1
  int root;    // a vertex lying on a shortest odd cycle
};

// Shortest odd cycle via level-equal edges in BFS trees: every equal-level
// edge closes an odd walk of length 2*level+1, and the minimum over all
// roots is attained with the root on a shortest odd cycle.
inline std::optional<OddGirthInfo> odd_girth_info(const RegularGraph& g) {
  int best = -1, best_root = -1;
  for (int s = 0; s < g.n; ++s) {
    auto dist = bfs_distances(g, s);
    for (int u = 0; u < g.n; ++u) {
      if (dist[u] < 0) continue;
      for (int v : g.adj[u]) {
        if (v < u || dist[v] != dist[u]) continue;
        int len = 2 * dist[u] + 1;
        if (best < 0 || len < best) {
          best = len;
          best_root = s;
        }
      }
    }
  }
  if (best < 0) return std::nullopt;
  return OddGirthInfo{best, best_root};
}

// Odd girth 2*phi+1, or nullopt for bipartite graphs.
inline std::optional<int> odd_girth(const RegularGraph& g) {
  auto info = odd_girth_info(g);
  if (!info) return std::nullopt;
  return info->length;
}

// ---------------------------------------------------------------------------
// Text format: "n d d_loops" header, then one line per node with its index
// followed by its d neighbors in ascending order.
// ---------------------------------------------------------------------------

inline void write_graph(std::ostream& out, const RegularGraph& g, int d_loops = 0) {
  out << g.n << ' ' << g.degree << ' ' << d_loops << '\n';
  for (int u = 0; u < g.n; ++u) {
    out << u;
    for (int v : g.adj[u]) out << ' ' << v;
    out << '\n';
  }
}

inline BalancingGraph read_graph(std::istream& in) {
  int n = 0, d = 0, d_loops = 0;
  if (!(in >> n >> d >> d_loops)) throw std::runtime_error("graph parse: bad header");
  if (n < 1 || d < 0 || d_loops < 0) throw std::runtime_error("graph parse: bad header values");
  RegularGraph g{n, d, std::vector<std::vector<int>>(n)};
  for (int row = 0; row < n; ++row) {
    int idx = -1;
    if (!(in >> idx) || idx != row) throw std::runtime_error("graph parse: bad node index");
    g.adj[row].resize(d);
    for (int k = 0; k < d; ++k)
      if (!(in >> g.adj[row][k])) throw std::runtime_error("graph parse: truncated neighbor list");
  }
  validate(g);  // rejects asymmetric or irregular input
  return BalancingGraph{std::move(g), d_loops};
}

inline BalancingGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return read_graph(in);
}

}  // namespace diffbal
