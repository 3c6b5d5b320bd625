#pragma once

// Synchronous-round simulation driver: advances a balancer step by step and
// feeds the optional ledger, remainder normalizer + deviation audit,
// potential tracker, and dip-window checker along the way. Buffers are
// reused across rounds; a single Simulation is strictly sequential.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "diffbal/balancers.hpp"
#include "diffbal/ledger.hpp"
#include "diffbal/metrics.hpp"

namespace diffbal {

// Cumulative fairness level guaranteed by construction for each balancer;
// used when normalization must know delta before the run.
inline std::int64_t known_delta(BalancerKind k) {
  switch (k) {
    case BalancerKind::SendFloor:
    case BalancerKind::SendRound:
      return 0;
    case BalancerKind::RotorRouter:
    case BalancerKind::RotorRouterStar:
      return 1;
    default:
      throw std::invalid_argument("known_delta: balancer is not cumulatively fair");
  }
}

struct DipParams {
  DipThreshold threshold;
  std::int64_t t_start = 0;
};

struct SimOptions {
  bool ledger = false;
  bool keep_history = false;
  bool normalize = false;              // Proposition-3 accounting + Eq. (5) audit
  std::vector<std::int64_t> levels;    // potential levels; empty disables tracking
  std::int64_t phi_s = 1;
  std::optional<DipParams> dip;
};

class Simulation {
 public:
  Simulation(const BalancingGraph& g, BalancerKind kind, Loads x0, BalancerState state,
             SimOptions opt = {})
      : g_(&g), kind_(kind), x_(std::move(x0)), state_(std::move(state)), opt_(std::move(opt)) {
    check_feasible(kind_, g);
    if (static_cast<int>(x_.size()) != g.n())
      throw std::invalid_argument("simulation: load size mismatch");
    total_ = total_load(x_);
    if (opt_.ledger || opt_.keep_history)
      ledger_ = std::make_unique<FlowLedger>(g, x_, opt_.keep_history);
    if (opt_.normalize) {
      normalizer_ = std::make_unique<RemainderNormalizer>(g, known_delta(kind_));
      audit_ = std::make_unique<DeviationAudit>(g, x_);
    }
    if (!opt_.levels.empty()) {
      potentials_ = std::make_unique<PotentialTracker>(opt_.levels, opt_.phi_s, g.d_plus());
      potentials_->start(x_);
    }
    if (opt_.dip)
      dip_ = std::make_unique<DipWindowCheck>(opt_.dip->threshold, opt_.dip->t_start, g.n());
  }

  std::int64_t t() const { return t_; }
  const Loads& loads() const { return x_; }
  std::int64_t total() const { return total_; }
  const BalancingGraph& graph() const { return *g_; }
  const BalancerState& state() const { return state_; }

  const FlowLedger* ledger() const { return ledger_.get(); }
  const PotentialTracker* potentials() const { return potentials_.get(); }
  const DeviationAudit* deviation() const { return audit_.get(); }
  const RemainderNormalizer* normalizer() const { return normalizer_.get(); }
  const DipWindowCheck* dip() const { return dip_.get(); }
  const StepFlows& last_flows() const { return flows_; }

  void advance(std::int64_t rounds) {
    for (std::int64_t k = 0; k < rounds; ++k) advance_one();
  }

  void advance_one() {
    step_inplace(kind_, *g_, x_, state_, flows_, next_);
    if (ledger_) ledger_->record_step(flows_);
    if (normalizer_) audit_->feed(normalizer_->normalize(flows_));
    if (potentials_) potentials_->on_step(x_, next_);
    ++t_;
    x_.swap(next_);
    if (dip_) dip_->observe(t_, x_);
    if (total_load(x_) != total_)
      throw std::logic_error("simulation: token conservation broken");
  }

 private:
  const BalancingGraph* g_;
  BalancerKind kind_;
  Loads x_, next_;
  BalancerState state_;
  SimOptions opt_;
  StepFlows flows_;
  std::int64_t t_ = 0;
  std::int64_t total_ = 0;
  std::unique_ptr<FlowLedger> ledger_;
  std::unique_ptr<RemainderNormalizer> normalizer_;
  std::unique_ptr<DeviationAudit> audit_;
  std::unique_ptr<PotentialTracker> potentials_;
  std::unique_ptr<DipWindowCheck> dip_;
};

}  // namespace diffbal
