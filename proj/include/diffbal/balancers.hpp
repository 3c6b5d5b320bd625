#pragma once

// Synchronous-round token balancers on a balancing graph. Every discrete
// balancer distributes a node's full load over its d+ ports each round
// (remainder 0); loads and flows are exact 64-bit integers, so trajectories
// are reproducible bit for bit. Port flows are always reported in canonical
// port order even when a rotor walks the ports through a per-node
// permutation override.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffbal/graph.hpp"

namespace diffbal {

using Loads = std::vector<std::int64_t>;

inline std::int64_t total_load(const Loads& x) {
  std::int64_t sum = 0;
  for (std::int64_t v : x) {
    if (v < 0) throw std::invalid_argument("load vector has a negative entry");
    if (__builtin_add_overflow(sum, v, &sum))
      throw std::overflow_error("load vector total overflows");
  }
  return sum;
}

struct StepFlows {
  std::vector<std::vector<std::int64_t>> port;  // [node][canonical port index]
  std::vector<std::int64_t> remainder;          // r_t(u), zero for all built-in balancers

  void reset(int n, int d_plus) {
    if (static_cast<int>(port.size()) == n &&
        (n == 0 || static_cast<int>(port[0].size()) == d_plus)) {
      for (auto& row : port) std::fill(row.begin(), row.end(), 0);
    } else {
      port.assign(n, std::vector<std::int64_t>(d_plus, 0));
    }
    remainder.assign(n, 0);
  }
};

// Persistent per-node state. Stateless balancers carry none of it; the
// rotor-router kinds use `rotor` (and honor `port_order` overrides, needed
// for the adversarial odd-cycle configuration); the steady-state adversary
// replays `fixed_flows` every round.
struct BalancerState {
  std::vector<int> rotor;
  std::vector<std::vector<int>> port_order;
  std::vector<std::vector<std::int64_t>> fixed_flows;

  bool stateless() const {
    return rotor.empty() && port_order.empty() && fixed_flows.empty();
  }
};

enum class BalancerKind {
  SendFloor,
  SendRound,
  RotorRouter,
  RotorRouterStar,
  AdversarySteady,
};

inline const char* balancer_name(BalancerKind k) {
  switch (k) {
    case BalancerKind::SendFloor: return "send-floor";
    case BalancerKind::SendRound: return "send-round";
    case BalancerKind::RotorRouter: return "rotor-router";
    case BalancerKind::RotorRouterStar: return "rotor-router-star";
    case BalancerKind::AdversarySteady: return "adversary-steady";
  }
  return "?";
}

// Construction-time feasibility guards.
inline void check_feasible(BalancerKind k, const BalancingGraph& g) {
  switch (k) {
    case BalancerKind::SendFloor:
      // the floor surplus lives on self-loops, so at least one must exist
      if (g.d_loops < 1)
        throw std::invalid_argument("send-floor requires at least one self-loop");
      break;
    case BalancerKind::SendRound:
      // with d+ < 2d, d*[x/d+] can exceed x and the residual turns negative
      if (g.d_plus() < 2 * g.degree())
        throw std::invalid_argument("send-round requires d+ >= 2d self-loop slack");
      break;
    case BalancerKind::RotorRouterStar:
      if (g.d_loops < 1)
        throw std::invalid_argument("rotor-router-star requires at least one self-loop");
      break;
    default:
      break;
  }
}

inline BalancerState initial_state(BalancerKind k, const BalancingGraph& g) {
  check_feasible(k, g);
  BalancerState st;
  if (k == BalancerKind::RotorRouter || k == BalancerKind::RotorRouterStar)
    st.rotor.assign(g.n(), 0);
  return st;
}

// ---------------------------------------------------------------------------
// Per-node distribution rules (pure; canonical port order)
// ---------------------------------------------------------------------------

// floor(x/d+) to every original port; the rest goes to self-loops, each loop
// getting at least floor(x/d+), with the surplus dealt round-robin starting
// at the first loop.
inline void send_floor_flows(std::int64_t x, int d, int d_loops,
                             std::vector<std::int64_t>& out) {
  const int d_plus = d + d_loops;
  const std::int64_t q = x / d_plus;
  const std::int64_t extra = x - static_cast<std::int64_t>(d_plus) * q;  // e(u) < d+
  for (int p = 0; p < d; ++p) out[p] = q;
  for (int i = 0; i < d_loops; ++i)
    out[d + i] = q + extra / d_loops + (i < extra % d_loops ? 1 : 0);
}

// round-half-up(x/d+) to every original port; the rest spread over the
// self-loops as evenly as possible, earlier loops first.
inline void send_round_flows(std::int64_t x, int d, int d_loops,
                             std::vector<std::int64_t>& out) {
  const int d_plus = d + d_loops;
  const std::int64_t q = x / d_plus;
  const std::int64_t e = x % d_plus;
  const std::int64_t rounded = q + (2 * e >= d_plus ? 1 : 0);
  const std::int64_t rest = x - static_cast<std::int64_t>(d) * rounded;
  if (rest < 0) throw std::logic_error("send-round residual negative (guard breached)");
  for (int p = 0; p < d; ++p) out[p] = rounded;
  for (int i = 0; i < d_loops; ++i)
    out[d + i] = rest / d_loops + (i < rest % d_loops ? 1 : 0);
}

// Round-robin over all d+ slots starting at the rotor; returns the new rotor
// position (rotor + x) mod d+.
inline int rotor_router_flows(std::int64_t x, int rotor, int d_plus,
                              std::vector<std::int64_t>& slots) {
  const std::int64_t q = x / d_plus;
  const int extra = static_cast<int>(x % d_plus);
  for (int s = 0; s < d_plus; ++s)
    slots[s] = q + ((s - rotor + d_plus) % d_plus < extra ? 1 : 0);
  return static_cast<int>((rotor + x) % d_plus);
}

// The last self-loop is special and always receives ceil(x/(2*d0)), capped
// at x; the rest of the load is rotor-routed over the remaining d+-1 ports.
inline int rotor_router_star_flows(std::int64_t x, int rotor, int d, int d_loops,
                                   std::vector<std::int64_t>& out) {
  const int d_plus = d + d_loops;
  const int m = d_plus - 1;
  std::int64_t special = (x + 2 * d_loops - 1) / (2 * d_loops);
  if (special > x) special = x;
  out[d_plus - 1] = special;
  const std::int64_t rest = x - special;
  const std::int64_t q = rest / m;
  const int extra = static_cast<int>(rest % m);
  for (int s = 0; s < m; ++s)
    out[s] = q + ((s - rotor + m) % m < extra ? 1 : 0);
  return static_cast<int>((rotor + rest) % m);
}

// ---------------------------------------------------------------------------
// Step engine
// ---------------------------------------------------------------------------

struct StepResult {
  StepFlows flows;
  Loads next;
};

// One synchronous round: computes every node's port flows from its current
// load (mutating rotor state), then delivers them. Exact; token conservation
// and x_t(u) = f_out + r_t(u) are asserted per node.
inline void step_inplace(BalancerKind kind, const BalancingGraph& g, const Loads& x,
                         BalancerState& state, StepFlows& flows, Loads& next) {
  const int n = g.n();
  const int d = g.degree();
  const int d_plus = g.d_plus();
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("step: load vector size mismatch");
  flows.reset(n, d_plus);
  next.assign(n, 0);

  std::vector<std::int64_t> slots(d_plus);
  for (int u = 0; u < n; ++u) {
    if (x[u] < 0) throw std::invalid_argument("step: negative load");
    auto& out = flows.port[u];
    switch (kind) {
      case BalancerKind::SendFloor:
        send_floor_flows(x[u], d, g.d_loops, out);
        break;
      case BalancerKind::SendRound:
        send_round_flows(x[u], d, g.d_loops, out);
        break;
      case BalancerKind::RotorRouter: {
        state.rotor[u] = rotor_router_flows(x[u], state.rotor[u], d_plus, slots);
        if (!state.port_order.empty() && !state.port_order[u].empty()) {
          for (int s = 0; s < d_plus; ++s) out[state.port_order[u][s]] = slots[s];
        } else {
          out = slots;
        }
        break;
      }
      case BalancerKind::RotorRouterStar:
        state.rotor[u] = rotor_router_star_flows(x[u], state.rotor[u], d, g.d_loops, out);
        break;
      case BalancerKind::AdversarySteady: {
        const auto& fixed = state.fixed_flows.at(u);
        std::int64_t sum = std::accumulate(fixed.begin(), fixed.end(), std::int64_t{0});
        if (sum != x[u])
          throw std::runtime_error("adversary-steady: fixed flows infeasible for load of node " +
                                   std::to_string(u));
        out = fixed;
        break;
      }
    }
    std::int64_t sent = std::accumulate(out.begin(), out.end(), std::int64_t{0});
    if (sent + flows.remainder[u] != x[u])
      throw std::logic_error("step: port flows do not account for the load of node " +
                             std::to_string(u));
  }

  for (int u = 0; u < n; ++u) {
    next[u] += flows.remainder[u];
    for (int p = 0; p < d_plus; ++p) next[g.port_target(u, p)] += flows.port[u][p];
  }
}

inline StepResult step(BalancerKind kind, const BalancingGraph& g, const Loads& x,
                       BalancerState& state) {
  StepResult r;
  step_inplace(kind, g, x, state, r.flows, r.next);
  return r;
}

}  // namespace diffbal
