#pragma once

// Cumulative flow ledger and the fairness machinery built on it. The ledger
// ingests the per-round port flows, re-derives the load trajectory, and
// hard-fails if the bookkeeping identity x1(u) + F_in_{t-1}(u) = r_t(u) +
// F_out_t(u) ever breaks; that identity holding is what every other audit
// relies on. All accumulation is overflow-checked 64-bit integer math.
//
// On top of the ledger live:
//   - the cumulative fairness gap (exact max pairwise gap of original-edge
//     cumulative flows, over all nodes and all recorded rounds),
//   - per-round round-fairness and the largest feasible self-preference s,
//   - the remainder normalization that shifts self-loop tokens into per-node
//     remainders until *all* ports are pairwise delta-fair,
//   - the corrective-vector diagnostics comparing cumulative out-flows with
//     the continuous process, checked exactly (integer identity) and in
//     floating point against the transition matrix.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffbal/balancers.hpp"
#include "diffbal/graph.hpp"

namespace diffbal {

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error(what);
  return out;
}

}  // namespace detail

struct FairnessViolation {
  std::int64_t t = 0;
  int node = 0;
  std::string detail;
};

struct FairnessReport {
  std::int64_t steps = 0;
  std::int64_t delta_observed = 0;  // exact max pairwise original-edge gap
  bool round_fair = true;           // every port flow in {floor, ceil}
  bool min_flow_ok = true;          // every port flow >= floor(x/d+)
  int good_s = 0;                   // largest s in [0, d0] passing every round
  std::vector<FairnessViolation> violations;
};

class FlowLedger {
 public:
  static constexpr std::size_t kMaxViolations = 64;

  explicit FlowLedger(const BalancingGraph& g, Loads x1, bool keep_history = false)
      : g_(&g),
        x_(std::move(x1)),
        x1_(x_),
        keep_history_(keep_history),
        cum_(g.n(), std::vector<std::int64_t>(g.d_plus(), 0)),
        cum_out_(g.n(), 0),
        cum_in_(g.n(), 0),
        remainder_(g.n(), 0) {
    if (static_cast<int>(x_.size()) != g.n())
      throw std::invalid_argument("ledger: load vector size mismatch");
    total_load(x_);  // rejects negatives
    s_cap_ = g.d_loops;
  }

  std::int64_t t() const { return t_; }
  const Loads& initial_loads() const { return x1_; }
  const Loads& loads() const { return x_; }
  std::int64_t cumulative(int u, int p) const { return cum_[u][p]; }
  std::int64_t cumulative_out(int u) const { return cum_out_[u]; }
  std::int64_t cumulative_in(int u) const { return cum_in_[u]; }
  std::int64_t remainder(int u) const { return remainder_[u]; }

  const std::vector<StepFlows>& history() const {
    if (!keep_history_) throw std::logic_error("ledger: history not retained");
    return history_;
  }

  // Ingest one round. Flows must describe exactly the current load vector.
  void record_step(const StepFlows& f) {
    const int n = g_->n();
    const int d = g_->degree();
    const int d_plus = g_->d_plus();
    if (static_cast<int>(f.port.size()) != n)
      throw std::invalid_argument("ledger: flow row count mismatch");
    ++t_;

    Loads next(n, 0);
    for (int u = 0; u < n; ++u) {
      const auto& row = f.port[u];
      if (static_cast<int>(row.size()) != d_plus)
        throw std::invalid_argument("ledger: port count mismatch");
      std::int64_t out = f.remainder[u];
      for (int p = 0; p < d_plus; ++p) {
        if (row[p] < 0) throw std::runtime_error("ledger corruption: negative flow");
        out = detail::checked_add(out, row[p], "ledger: flow sum overflow");
      }
      if (out != x_[u])
        throw std::runtime_error("ledger corruption: flows of node " + std::to_string(u) +
                                 " do not sum to its load (Eq. 2)");
      audit_node(u, row, x_[u]);
      for (int p = 0; p < d_plus; ++p) {
        cum_[u][p] = detail::checked_add(cum_[u][p], row[p], "ledger: cumulative overflow");
        next[g_->port_target(u, p)] += row[p];
      }
      next[u] += f.remainder[u];
    }

    // advance per-node totals and re-check Eq. (1) exactly
    for (int u = 0; u < n; ++u) {
      const std::int64_t fin_prev = cum_in_[u];
      std::int64_t fout = f.remainder[u];
      for (int p = 0; p < d_plus; ++p) fout += f.port[u][p];
      fout -= f.remainder[u];
      cum_out_[u] = detail::checked_add(cum_out_[u], fout, "ledger: out overflow");
      remainder_[u] = f.remainder[u];
      if (x1_[u] + fin_prev != remainder_[u] + cum_out_[u])
        throw std::runtime_error("ledger corruption: Eq. (1) violated at node " +
                                 std::to_string(u) + ", t=" + std::to_string(t_));
    }
    for (int u = 0; u < n; ++u) {
      std::int64_t fin = 0;
      for (int p = 0; p < d; ++p) {
        const int v = g_->base.adj[u][p];
        // incoming over the reverse edge (v,u)
        fin += f.port[v][reverse_port(v, u)];
      }
      for (int p = d; p < d_plus; ++p) fin += f.port[u][p];
      cum_in_[u] = detail::checked_add(cum_in_[u], fin, "ledger: in overflow");
    }

    x_ = std::move(next);
    if (keep_history_) history_.push_back(f);
  }

  FairnessReport report() const {
    FairnessReport rep;
    rep.steps = t_;
    rep.delta_observed = delta_observed_;
    rep.round_fair = round_fair_;
    rep.min_flow_ok = min_flow_ok_;
    rep.violations = violations_;
    const bool cumulative_one_fair = delta_observed_ <= 1;
    rep.good_s = (round_fair_ && min_flow_ok_ && cumulative_one_fair)
                     ? static_cast<int>(std::min<std::int64_t>(s_cap_, g_->d_loops))
                     : 0;
    return rep;
  }

  const BalancingGraph& graph() const { return *g_; }

 private:
  int reverse_port(int v, int u) const {
    const auto& nb = g_->base.adj[v];
    return static_cast<int>(std::lower_bound(nb.begin(), nb.end(), u) - nb.begin());
  }

  void note(std::int64_t t, int node, std::string detail) {
    if (violations_.size() < kMaxViolations)
      violations_.push_back({t, node, std::move(detail)});
  }

  // Per-round fairness bookkeeping for one node.
  void audit_node(int u, const std::vector<std::int64_t>& row, std::int64_t x) {
    const int d = g_->degree();
    const int d_plus = g_->d_plus();
    const std::int64_t floor_q = x / d_plus;
    const std::int64_t ceil_q = (x + d_plus - 1) / d_plus;

    // cumulative pairwise gap over original edges (after this round)
    if (d >= 2) {
      std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0;
      for (int p = 0; p < d; ++p) {
        const std::int64_t c = cum_[u][p] + row[p];
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      if (hi - lo > delta_observed_) delta_observed_ = hi - lo;
    }

    std::int64_t ceil_loops = 0;
    bool fair_here = true;
    for (int p = 0; p < d_plus; ++p) {
      if (row[p] < floor_q) {
        if (min_flow_ok_) note(t_, u, "port below floor(x/d+)");
        min_flow_ok_ = false;
        fair_here = false;
      }
      if (row[p] > ceil_q) fair_here = false;
      if (p >= d && row[p] == ceil_q) ++ceil_loops;
    }
    if (!fair_here) {
      if (round_fair_) note(t_, u, "port flow outside {floor, ceil}");
      round_fair_ = false;
    }
    // self-preference cap: with e(u) = x - d+ * floor surplus tokens, at
    // least min{s, e(u)} loops must sit at the ceiling
    const std::int64_t e = x - static_cast<std::int64_t>(d_plus) * floor_q;
    if (fair_here && e > 0 && e > ceil_loops && ceil_loops < s_cap_)
      s_cap_ = ceil_loops;
  }

  const BalancingGraph* g_;
  Loads x_;
  Loads x1_;
  bool keep_history_ = false;
  std::int64_t t_ = 0;
  std::vector<std::vector<std::int64_t>> cum_;
  std::vector<std::int64_t> cum_out_, cum_in_;
  Loads remainder_;
  std::vector<StepFlows> history_;

  std::int64_t delta_observed_ = 0;
  bool round_fair_ = true;
  bool min_flow_ok_ = true;
  std::int64_t s_cap_ = 0;
  std::vector<FairnessViolation> violations_;
};

inline std::int64_t cumulative_fairness_gap(const FlowLedger& ledger) {
  return ledger.report().delta_observed;
}

inline bool round_fairness_check(const FlowLedger& ledger) {
  return ledger.report().round_fair;
}

// Returns the largest feasible s; the bool overload answers for a candidate.
inline int good_s_check(const FlowLedger& ledger) { return ledger.report().good_s; }

inline bool good_s_check(const FlowLedger& ledger, int s) {
  return s <= good_s_check(ledger);
}

// ---------------------------------------------------------------------------
// Remainder normalization: shift tokens between self-loop flows and a
// per-node remainder, processing ports in canonical order and clamping each
// self-loop's cumulative flow into the delta-band of the ports already
// processed. Original-edge flows are never touched, the end-of-round state
// is pairwise delta-fair across *all* ports, and |r'_t(u)| stays within d+.
// ---------------------------------------------------------------------------

class RemainderNormalizer {
 public:
  RemainderNormalizer(const BalancingGraph& g, std::int64_t delta)
      : g_(&g), delta_(delta), cum_(g.n(), std::vector<std::int64_t>(g.d_plus(), 0)) {}

  std::int64_t max_abs_remainder() const { return max_abs_remainder_; }
  std::int64_t t() const { return t_; }
  const std::vector<std::vector<std::int64_t>>& cumulative() const { return cum_; }

  StepFlows normalize(const StepFlows& raw) {
    const int n = g_->n();
    const int d = g_->degree();
    const int d_plus = g_->d_plus();
    ++t_;
    StepFlows out = raw;
    for (int u = 0; u < n; ++u) {
      std::int64_t lo = std::numeric_limits<std::int64_t>::max();
      std::int64_t hi = std::numeric_limits<std::int64_t>::min();
      for (int p = 0; p < d_plus; ++p) {
        std::int64_t c = cum_[u][p] + raw.port[u][p];
        if (p < d) {
          if (p > 0 && (c > lo + delta_ || c < hi - delta_))
            throw std::runtime_error(
                "normalize_remainder: input is not delta-fair on original edges (node " +
                std::to_string(u) + ", t=" + std::to_string(t_) + ")");
        } else {
          const std::int64_t clamped = std::min(lo + delta_, std::max(hi - delta_, c));
          out.port[u][p] = raw.port[u][p] + (clamped - c);
          if (out.port[u][p] < 0)
            throw std::logic_error("normalize_remainder: negative adjusted flow");
          out.remainder[u] += c - clamped;
          c = clamped;
        }
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        cum_[u][p] = c;
      }
      if (std::abs(out.remainder[u]) > d_plus)
        throw std::logic_error("normalize_remainder: |r'| exceeded d+ at node " +
                               std::to_string(u));
      max_abs_remainder_ = std::max(max_abs_remainder_, std::abs(out.remainder[u]));
      // Eq. (3): every port's cumulative flow within delta of F_out/d+
      std::int64_t fout = 0;
      for (int p = 0; p < d_plus; ++p) fout += cum_[u][p];
      for (int p = 0; p < d_plus; ++p) {
        const std::int64_t num = static_cast<std::int64_t>(d_plus) * cum_[u][p] - fout;
        if (std::abs(num) > delta_ * d_plus)
          throw std::logic_error("normalize_remainder: Eq. (3) bound violated");
      }
    }
    return out;
  }

 private:
  const BalancingGraph* g_;
  std::int64_t delta_;
  std::vector<std::vector<std::int64_t>> cum_;
  std::int64_t t_ = 0;
  std::int64_t max_abs_remainder_ = 0;
};

struct NormalizedTrace {
  std::vector<StepFlows> flows;
  std::int64_t max_abs_remainder = 0;
  std::int64_t delta = 0;  // the fairness level the trace was normalized to
};

// Offline form: replays a history-keeping ledger, normalizing to the exact
// observed original-edge gap.
inline NormalizedTrace normalize_remainder(const FlowLedger& ledger) {
  NormalizedTrace out;
  out.delta = ledger.report().delta_observed;
  RemainderNormalizer norm(ledger.graph(), out.delta);
  for (const auto& f : ledger.history()) out.flows.push_back(norm.normalize(f));
  out.max_abs_remainder = norm.max_abs_remainder();
  return out;
}

// ---------------------------------------------------------------------------
// Corrective-vector diagnostics. With delta_{t-1,u}(v) the gap between the
// cumulative flow v sent to u and the ideal equal split F_out_{t-1}(v)/d+,
// the cumulative out-flows satisfy
//   F_out_t = x1 + P F_out_{t-1} + eps_t,   eps_t(u) = sum_v delta_{t-1,u}(v) - r_t(u).
// The identity is verified twice per round: exactly, with everything scaled
// by d+ in integers, and in floating point against the matrix product.
// ---------------------------------------------------------------------------

struct DeviationStats {
  std::int64_t steps = 0;
  bool exact_identity = true;
  double max_residual = 0.0;       // floating-point identity residual
  double max_eps_inf = 0.0;        // max_t ||eps_t||inf
  double max_delta_entry = 0.0;    // max |delta_{t,u}(v)| over non-self entries
  std::int64_t max_abs_remainder = 0;
};

class DeviationAudit {
 public:
  DeviationAudit(const BalancingGraph& g, Loads x1, bool keep_eps = false)
      : g_(&g),
        x1_(std::move(x1)),
        keep_eps_(keep_eps),
        cum_(g.n(), std::vector<std::int64_t>(g.d_plus(), 0)),
        cum_out_(g.n(), 0) {
    rev_.assign(g.n(), std::vector<int>(g.degree(), 0));
    for (int u = 0; u < g.n(); ++u)
      for (int p = 0; p < g.degree(); ++p) {
        const int v = g.base.adj[u][p];
        const auto& nb = g.base.adj[v];
        rev_[u][p] = static_cast<int>(std::lower_bound(nb.begin(), nb.end(), u) - nb.begin());
      }
  }

  void feed(const StepFlows& f) {
    const int n = g_->n();
    const int d = g_->degree();
    const int d_plus = g_->d_plus();
    const int d_loops = g_->d_loops;
    ++stats_.steps;

    prev_cum_ = cum_;
    prev_out_ = cum_out_;
    for (int u = 0; u < n; ++u) {
      std::int64_t fout = 0;
      for (int p = 0; p < d_plus; ++p) {
        cum_[u][p] = detail::checked_add(cum_[u][p], f.port[u][p], "audit: overflow");
        fout += f.port[u][p];
      }
      cum_out_[u] += fout;
      stats_.max_abs_remainder = std::max(stats_.max_abs_remainder, std::abs(f.remainder[u]));
    }

    if (keep_eps_) eps_history_.emplace_back(n, 0.0);
    for (int u = 0; u < n; ++u) {
      // eps_num = d+ * eps_t(u), assembled from the corrective entries
      std::int64_t eps_num = 0;
      std::int64_t neighbor_out = 0;  // sum of F_out_{t-1}(v) over v in N(u)\{u}
      for (int p = 0; p < d; ++p) {
        const int v = g_->base.adj[u][p];
        const std::int64_t num =
            static_cast<std::int64_t>(d_plus) * prev_cum_[v][rev_[u][p]] - prev_out_[v];
        eps_num += num;
        neighbor_out += prev_out_[v];
        stats_.max_delta_entry =
            std::max(stats_.max_delta_entry, std::abs(static_cast<double>(num)) / d_plus);
      }
      std::int64_t self_loops = 0;
      for (int p = d; p < d_plus; ++p) self_loops += prev_cum_[u][p];
      eps_num += static_cast<std::int64_t>(d_plus) * self_loops -
                 static_cast<std::int64_t>(d_loops) * prev_out_[u];
      eps_num -= static_cast<std::int64_t>(d_plus) * f.remainder[u];

      // exact identity, everything times d+
      const std::int64_t lhs = static_cast<std::int64_t>(d_plus) * cum_out_[u];
      const std::int64_t rhs = static_cast<std::int64_t>(d_plus) * x1_[u] + neighbor_out +
                               static_cast<std::int64_t>(d_loops) * prev_out_[u] + eps_num;
      if (lhs != rhs) stats_.exact_identity = false;

      const double eps = static_cast<double>(eps_num) / d_plus;
      if (keep_eps_) eps_history_.back()[u] = eps;
      stats_.max_eps_inf = std::max(stats_.max_eps_inf, std::abs(eps));
      const double p_dot = (static_cast<double>(neighbor_out) +
                            static_cast<double>(d_loops) * static_cast<double>(prev_out_[u])) /
                           d_plus;
      const double residual =
          std::abs(static_cast<double>(cum_out_[u]) - static_cast<double>(x1_[u]) - p_dot - eps);
      stats_.max_residual = std::max(stats_.max_residual, residual);
    }
  }

  const DeviationStats& stats() const { return stats_; }
  const std::vector<std::vector<double>>& eps_history() const {
    if (!keep_eps_) throw std::logic_error("deviation audit: eps history not retained");
    return eps_history_;
  }

 private:
  const BalancingGraph* g_;
  Loads x1_;
  bool keep_eps_ = false;
  std::vector<std::vector<std::int64_t>> cum_, prev_cum_;
  std::vector<std::int64_t> cum_out_, prev_out_;
  std::vector<std::vector<int>> rev_;
  DeviationStats stats_;
  std::vector<std::vector<double>> eps_history_;
};

// Offline form over a history-keeping ledger: normalize first (Proposition-3
// accounting), then audit the normalized trace.
inline DeviationStats deviation_diagnostics(const FlowLedger& ledger) {
  NormalizedTrace trace = normalize_remainder(ledger);
  DeviationAudit audit(ledger.graph(), ledger.initial_loads());
  for (const auto& f : trace.flows) audit.feed(f);
  return audit.stats();
}

}  // namespace diffbal
