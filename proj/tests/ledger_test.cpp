#include "diffbal/ledger.hpp"

#include <gtest/gtest.h>

#include "diffbal/graph.hpp"
#include "diffbal/simulation.hpp"

using namespace diffbal;

namespace {

// Runs a balancer and returns the simulation for report inspection.
Simulation run_sim(const BalancingGraph& g, BalancerKind kind, Loads x0, int steps,
                   bool keep_history = false) {
  SimOptions opt;
  opt.ledger = true;
  opt.keep_history = keep_history;
  Simulation sim(g, kind, std::move(x0), initial_state(kind, g), opt);
  sim.advance(steps);
  return sim;
}

TEST(Ledger, FirstStepCumulatives) {
  auto g = augment(make_cycle(3), 2);
  Loads x0{8, 0, 0};
  auto st = initial_state(BalancerKind::SendFloor, g);
  FlowLedger ledger(g, x0);
  auto r = step(BalancerKind::SendFloor, g, x0, st);
  ledger.record_step(r.flows);
  EXPECT_EQ(ledger.cumulative(0, 0), 2);  // F1(0->1)
  EXPECT_EQ(ledger.cumulative(0, 1), 2);  // F1(0->2)
  EXPECT_EQ(ledger.t(), 1);
}

TEST(Ledger, ZeroFlowsAdvanceOnlyTime) {
  auto g = augment(make_cycle(3), 2);
  FlowLedger ledger(g, Loads{0, 0, 0});
  StepFlows f;
  f.reset(3, 4);
  ledger.record_step(f);
  EXPECT_EQ(ledger.t(), 1);
  for (int u = 0; u < 3; ++u) {
    EXPECT_EQ(ledger.cumulative_out(u), 0);
    EXPECT_EQ(ledger.cumulative_in(u), 0);
  }
}

TEST(Ledger, EqOneHoldsOverRotorRun) {
  auto g = augment(make_cycle(8), 0);
  Loads x0(8, 0);
  x0[0] = 64;
  // record_step throws on any Eq. (1) violation, so completing is the check
  EXPECT_NO_THROW(run_sim(g, BalancerKind::RotorRouter, x0, 100));
}

TEST(Ledger, DetectsCorruptFlows) {
  auto g = augment(make_cycle(3), 2);
  FlowLedger ledger(g, Loads{4, 0, 0});
  StepFlows f;
  f.reset(3, 4);
  f.port[0] = {1, 1, 1, 0};  // sums to 3, load is 4
  EXPECT_THROW(ledger.record_step(f), std::runtime_error);
}

TEST(Ledger, DetectsNegativeFlow) {
  auto g = augment(make_cycle(3), 2);
  FlowLedger ledger(g, Loads{4, 4, 4});
  StepFlows f;
  f.reset(3, 4);
  for (int u = 0; u < 3; ++u) f.port[u] = {2, 2, 1, -1};
  EXPECT_THROW(ledger.record_step(f), std::runtime_error);
}

TEST(FairnessGap, ObservationOneLevels) {
  auto g = augment(make_random_regular(32, 4, 21), 4);
  Loads x0(g.n(), 0);
  x0[0] = 32 * 32;
  {
    auto sim = run_sim(g, BalancerKind::SendFloor, x0, 2000);
    EXPECT_EQ(sim.ledger()->report().delta_observed, 0);
  }
  {
    auto sim = run_sim(g, BalancerKind::SendRound, x0, 2000);
    EXPECT_EQ(sim.ledger()->report().delta_observed, 0);
  }
  {
    auto sim = run_sim(g, BalancerKind::RotorRouter, x0, 2000);
    EXPECT_LE(sim.ledger()->report().delta_observed, 1);
  }
}

TEST(RoundFairness, BalancersAndSyntheticTrace) {
  auto g = augment(make_cycle(8), 2);
  Loads x0(8, 0);
  x0[0] = 97;
  auto sim = run_sim(g, BalancerKind::RotorRouter, x0, 500);
  EXPECT_TRUE(sim.ledger()->report().round_fair);

  // lumping everything on one port with x > d+ is not round-fair
  FlowLedger ledger(g, Loads{8, 0, 0, 0, 0, 0, 0, 0});
  StepFlows f;
  f.reset(8, 4);
  f.port[0] = {8, 0, 0, 0};
  ledger.record_step(f);
  EXPECT_FALSE(ledger.report().round_fair);
  EXPECT_FALSE(ledger.report().min_flow_ok);
  EXPECT_FALSE(ledger.report().violations.empty());
}

// SendFloor lumps its surplus on the first self-loop, so for loads with a
// large residue it is not round-fair and hence not a good s-balancer.
TEST(GoodS, SendFloorSurplusDisqualifies) {
  auto g = augment(make_cycle(3), 2);
  Loads x0{7, 7, 7};  // e(u) = 3: loops get (3,2), above ceil = 2
  auto st = initial_state(BalancerKind::SendFloor, g);
  FlowLedger ledger(g, x0);
  ledger.record_step(step(BalancerKind::SendFloor, g, x0, st).flows);
  EXPECT_EQ(ledger.report().good_s, 0);
  EXPECT_FALSE(ledger.report().round_fair);
}

TEST(GoodS, SendRoundSelfPreference) {
  // d=2, d0=3: guaranteed (d+-2d) = 1
  auto g = augment(make_cycle(16), 3);
  Loads x0(16, 0);
  x0[0] = 16 * 16;
  auto sim = run_sim(g, BalancerKind::SendRound, x0, 3000);
  EXPECT_GE(sim.ledger()->report().good_s, 1);
}

TEST(GoodS, RotorRouterStarIsOneBalancer) {
  for (auto g : {augment(make_cycle(16), 2), augment(make_random_regular(24, 4, 5), 4)}) {
    Loads x0(g.n(), 0);
    x0[0] = 333;
    auto sim = run_sim(g, BalancerKind::RotorRouterStar, x0, 2000);
    EXPECT_GE(sim.ledger()->report().good_s, 1) << g.degree();
  }
}

// Exhaustive single-node check: the number of ceiling-level self-loops of
// SendRound is e - d whenever the originals round up, so the feasible s is
// exactly min over e of that count, i.e. ceil((d0-d)/2) and not d+-2d.
TEST(GoodS, SendRoundExactFeasibleS) {
  const int d = 4, d_loops = 9, d_plus = 13;
  std::vector<std::int64_t> out(d_plus);
  std::int64_t feasible = d_loops;
  for (std::int64_t x = 0; x < 6 * d_plus; ++x) {
    send_round_flows(x, d, d_loops, out);
    const std::int64_t q = x / d_plus, e = x - d_plus * q;
    const std::int64_t ceil_q = e > 0 ? q + 1 : q;
    std::int64_t ceil_loops = 0;
    for (int p = d; p < d_plus; ++p)
      if (out[p] == ceil_q) ++ceil_loops;
    if (e > 0 && e > ceil_loops) feasible = std::min(feasible, ceil_loops);
  }
  EXPECT_EQ(feasible, (d_loops - d + 1) / 2);  // = 3, strictly below d+-2d = 5
}

TEST(Normalizer, SendFloorTraceBecomesAllEdgeFair) {
  auto g = augment(make_cycle(4), 2);
  Loads x0{19, 2, 7, 0};
  auto sim = run_sim(g, BalancerKind::SendFloor, x0, 50, /*keep_history=*/true);
  EXPECT_EQ(sim.ledger()->report().delta_observed, 0);
  auto trace = normalize_remainder(*sim.ledger());
  EXPECT_EQ(trace.delta, 0);
  EXPECT_LE(trace.max_abs_remainder, g.d_plus());
  // original flows untouched, loop flows exactly at the originals' level
  const auto& hist = sim.ledger()->history();
  for (std::size_t t = 0; t < hist.size(); ++t)
    for (int u = 0; u < g.n(); ++u)
      for (int p = 0; p < g.degree(); ++p)
        ASSERT_EQ(trace.flows[t].port[u][p], hist[t].port[u][p]);
}

TEST(Normalizer, AllZeroTraceIsIdentity) {
  auto g = augment(make_cycle(3), 2);
  RemainderNormalizer norm(g, 0);
  StepFlows f;
  f.reset(3, 4);
  auto out = norm.normalize(f);
  EXPECT_EQ(out.port, f.port);
  EXPECT_EQ(out.remainder, f.remainder);
  EXPECT_EQ(norm.max_abs_remainder(), 0);
}

TEST(Normalizer, RejectsUnfairOriginals) {
  auto g = augment(make_cycle(3), 2);
  RemainderNormalizer norm(g, 0);
  StepFlows f;
  f.reset(3, 4);
  f.port[0] = {3, 1, 0, 0};  // originals differ by 2 under delta = 0
  EXPECT_THROW(norm.normalize(f), std::runtime_error);
}

TEST(Deviation, SendFloorIdentityHolds) {
  auto g = augment(make_cycle(3), 2);
  auto sim = run_sim(g, BalancerKind::SendFloor, Loads{50, 1, 0}, 50, true);
  auto stats = deviation_diagnostics(*sim.ledger());
  EXPECT_TRUE(stats.exact_identity);
  EXPECT_LE(stats.max_residual, 1e-9);
  EXPECT_LE(stats.max_delta_entry, 0.0 + 1e-12);  // delta = 0 balancer
}

TEST(Deviation, ZeroRunHasZeroEps) {
  auto g = augment(make_cycle(3), 2);
  auto sim = run_sim(g, BalancerKind::SendFloor, Loads{0, 0, 0}, 10, true);
  auto stats = deviation_diagnostics(*sim.ledger());
  EXPECT_TRUE(stats.exact_identity);
  EXPECT_EQ(stats.max_eps_inf, 0.0);
}

TEST(Deviation, RotorRouterBounds) {
  auto g = augment(make_cycle(8), 2);
  Loads x0(8, 0);
  x0[0] = 200;
  auto sim = run_sim(g, BalancerKind::RotorRouter, x0, 300, true);
  auto stats = deviation_diagnostics(*sim.ledger());
  EXPECT_TRUE(stats.exact_identity);
  EXPECT_LE(stats.max_residual, 1e-9);
  // ||eps|| <= delta*d+ + r with delta = 1, r <= d+
  EXPECT_LE(stats.max_eps_inf, 2.0 * g.d_plus());
  EXPECT_LE(stats.max_delta_entry, 1.0 + 1e-12);
  EXPECT_LE(stats.max_abs_remainder, g.d_plus());
}

TEST(Deviation, AllFourBalancersPassEqFive) {
  for (auto kind : {BalancerKind::SendFloor, BalancerKind::SendRound, BalancerKind::RotorRouter,
                    BalancerKind::RotorRouterStar}) {
    auto g = augment(make_random_regular(16, 3, 4), 3);
    Loads x0(16, 0);
    x0[3] = 500;
    auto sim = run_sim(g, kind, x0, 200, true);
    auto stats = deviation_diagnostics(*sim.ledger());
    EXPECT_TRUE(stats.exact_identity) << balancer_name(kind);
    EXPECT_LE(stats.max_residual, 1e-9) << balancer_name(kind);
    EXPECT_LE(stats.max_eps_inf,
              known_delta(kind) * g.d_plus() + stats.max_abs_remainder + 1e-12)
        << balancer_name(kind);
  }
}

}  // namespace
