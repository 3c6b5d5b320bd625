#pragma once

// Adversarial lower-bound constructions: the round-fair steady-state flow
// assignment pinned to BFS levels, the stateless clique fixture, and the
// 2-periodic rotor configuration on non-bipartite graphs.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "diffbal/balancers.hpp"
#include "diffbal/graph.hpp"

namespace diffbal {

// ---------------------------------------------------------------------------
// Round-fair steady state: f(v,w) = min(b(v), b(w)) with b the hop distance
// to the source. The flows are symmetric and constant over time, the load
// x(v) = sum_w f(w,v) is an exact fixed point, and the per-node flow spread
// is at most 1 (round-fair witness), yet nodes at distance diam keep a load
// gap of order d*diam.
// ---------------------------------------------------------------------------

struct SteadyStateAdversary {
  DistanceLabeling labeling;
  Loads loads;
  std::vector<std::vector<std::int64_t>> flows;  // [node][original port]
};

inline SteadyStateAdversary steady_state_adversary(const RegularGraph& g, int source) {
  SteadyStateAdversary adv;
  adv.labeling = distance_labeling(g, source);  // throws when disconnected
  const auto& b = adv.labeling.dist;
  adv.flows.assign(g.n, {});
  adv.loads.assign(g.n, 0);
  for (int u = 0; u < g.n; ++u) {
    adv.flows[u].resize(g.degree);
    for (int p = 0; p < g.degree; ++p)
      adv.flows[u][p] = std::min(b[u], b[g.adj[u][p]]);
  }
  // symmetric flows make sum-in equal sum-out, so this is the stationary load
  for (int u = 0; u < g.n; ++u)
    for (int p = 0; p < g.degree; ++p) adv.loads[g.adj[u][p]] += adv.flows[u][p];
  return adv;
}

// Packages the fixed flow table as a runnable balancer state on the
// unaugmented graph.
inline BalancerState adversary_state(const SteadyStateAdversary& adv) {
  BalancerState st;
  st.fixed_flows = adv.flows;
  return st;
}

// ---------------------------------------------------------------------------
// Stateless clique fixture: the circulant-clique graph with load
// l = floor(d/2)-1 on each clique node. Since l < d+, any stateless
// floor-based balancer keeps this vector fixed forever, so its discrepancy
// stays at l.
// ---------------------------------------------------------------------------

struct CliqueFixture {
  RegularGraph graph;
  Loads loads;
  std::int64_t clique_load = 0;  // l
};

inline CliqueFixture stateless_clique_fixture(int n, int d) {
  CliqueFixture fx;
  fx.graph = make_circulant_clique(n, d);
  fx.clique_load = d / 2 - 1;
  fx.loads.assign(n, 0);
  for (int u = 0; u < d / 2; ++u) fx.loads[u] = fx.clique_load;
  return fx;
}

// ---------------------------------------------------------------------------
// Odd-girth rotor configuration (needs d0 = 0 and a non-bipartite graph).
// With phi = (odd girth - 1)/2 and b the BFS distances from a vertex on a
// shortest odd cycle, the even-step flow over an edge (v1,v2) is
//   L                            if b(v1) = b(v2)
//   L + (phi - min(b))           if b(v1) even, b(v2) odd
//   L - (phi - min(b))           if b(v1) odd,  b(v2) even
// and odd steps mirror it: f1(v1,v2) = f0(v2,v1). Per-node spreads stay
// within 1, so ordering the heavy ports before the light ones realizes the
// flows as a rotor-router run that alternates between exactly two load
// vectors, the root swinging between (L+phi)*d and (L-phi)*d.
// ---------------------------------------------------------------------------

struct OddCycleRotorConfig {
  int phi = 0;
  int root = 0;
  Loads loads;                                    // even-step load vector
  BalancerState state;                            // rotors + port order overrides
  std::vector<std::vector<std::int64_t>> f_even;  // [node][canonical port]
  std::vector<std::vector<std::int64_t>> f_odd;
};

inline OddCycleRotorConfig odd_cycle_rotor_config(const RegularGraph& g,
                                                  std::int64_t base_load) {
  auto info = odd_girth_info(g);
  if (!info)
    throw std::invalid_argument("odd_cycle_rotor_config: graph is bipartite");
  OddCycleRotorConfig cfg;
  cfg.phi = (info->length - 1) / 2;
  cfg.root = info->root;
  if (base_load < cfg.phi)
    throw std::invalid_argument("odd_cycle_rotor_config: base load below phi gives negative flows");

  const auto b = bfs_distances(g, cfg.root);
  const int n = g.n;
  const int d = g.degree;
  auto flow = [&](int u, int v) -> std::int64_t {
    if (b[u] == b[v]) return base_load;
    const std::int64_t swing = cfg.phi - std::min(b[u], b[v]);
    return b[u] % 2 == 0 ? base_load + swing : base_load - swing;
  };

  cfg.f_even.assign(n, std::vector<std::int64_t>(d, 0));
  cfg.f_odd.assign(n, std::vector<std::int64_t>(d, 0));
  cfg.loads.assign(n, 0);
  for (int u = 0; u < n; ++u) {
    for (int p = 0; p < d; ++p) {
      const int v = g.adj[u][p];
      cfg.f_even[u][p] = flow(u, v);
      cfg.f_odd[u][p] = flow(v, u);
      if (cfg.f_even[u][p] < 0 || cfg.f_odd[u][p] < 0)
        throw std::invalid_argument("odd_cycle_rotor_config: base load too small");
      cfg.loads[u] += cfg.f_even[u][p];
    }
  }

  // Rotor realization: ports carrying the heavy (ceil) flow at even steps
  // come first in the per-node order, rotor at 0.
  cfg.state.rotor.assign(n, 0);
  cfg.state.port_order.assign(n, {});
  for (int u = 0; u < n; ++u) {
    const auto& f = cfg.f_even[u];
    const std::int64_t lo = *std::min_element(f.begin(), f.end());
    const std::int64_t hi = *std::max_element(f.begin(), f.end());
    if (hi - lo > 1)
      throw std::logic_error("odd_cycle_rotor_config: flow spread exceeds 1");
    if (hi == lo) continue;  // canonical order, rotor never moves
    auto& order = cfg.state.port_order[u];
    order.reserve(d);
    for (int p = 0; p < d; ++p)
      if (f[p] == hi) order.push_back(p);
    const int heavy = static_cast<int>(order.size());
    if (cfg.loads[u] % d != heavy)
      throw std::logic_error("odd_cycle_rotor_config: rotor arithmetic mismatch");
    for (int p = 0; p < d; ++p)
      if (f[p] == lo) order.push_back(p);
  }

  // Confirm the configuration really is 2-periodic under the rotor-router.
  BalancingGraph bg{g, 0};
  BalancerState st = cfg.state;
  Loads x = cfg.loads;
  for (int t = 0; t < 4; ++t) {
    auto r = step(BalancerKind::RotorRouter, bg, x, st);
    const auto& expect = (t % 2 == 0) ? cfg.f_even : cfg.f_odd;
    if (r.flows.port != expect)
      throw std::logic_error("odd_cycle_rotor_config: simulated flows deviate");
    x = std::move(r.next);
    if (t % 2 == 1 && x != cfg.loads)
      throw std::logic_error("odd_cycle_rotor_config: load vector not 2-periodic");
  }
  return cfg;
}

}  // namespace diffbal
