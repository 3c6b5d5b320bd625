#include "diffbal/harness.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include "diffbal/reproduce.hpp"

using namespace diffbal;

namespace {

TEST(Reproduce, VerdictsAreStable) {
  auto a = reproduce("thm5");
  auto b = reproduce("thm5");
  ASSERT_EQ(a.lines.size(), b.lines.size());
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    EXPECT_EQ(a.lines[i].pass, b.lines[i].pass);
    EXPECT_EQ(a.lines[i].detail, b.lines[i].detail);
  }
  EXPECT_THROW(reproduce("thm3"), std::invalid_argument);
}

TEST(GraphSpec, Grammar) {
  EXPECT_EQ(make_graph("cycle:12", 2).n(), 12);
  auto torus = make_graph("torus:8x2", 0);
  EXPECT_EQ(torus.n(), 64);
  EXPECT_EQ(torus.degree(), 4);
  EXPECT_EQ(make_graph("hypercube:6", 6).degree(), 6);
  EXPECT_EQ(make_graph("random:24:3:7", 3).d_plus(), 6);
  EXPECT_EQ(make_graph("circlique:8:4", 0).degree(), 4);

  EXPECT_THROW(make_graph("blob:4", 0), std::invalid_argument);
  EXPECT_THROW(make_graph("cycle", 0), std::invalid_argument);
  EXPECT_THROW(make_graph("torus:8", 0), std::invalid_argument);
  EXPECT_THROW(make_graph("cycle:abc", 0), std::invalid_argument);
  EXPECT_THROW(make_graph("hypercube:13", 0), std::invalid_argument);  // 8192 > cap
}

TEST(GraphSpec, FileRoundTripKeepsLoops) {
  auto g = make_graph("random:16:3:9", 5);
  const std::string path = "/tmp/diffbal_test_graph.txt";
  {
    std::ofstream out(path);
    write_graph(out, g.base, g.d_loops);
  }
  auto loaded = make_graph("file:" + path, -1);
  EXPECT_EQ(loaded.base.adj, g.base.adj);
  EXPECT_EQ(loaded.d_loops, 5);
  auto overridden = make_graph("file:" + path, 2);
  EXPECT_EQ(overridden.d_loops, 2);
  std::remove(path.c_str());
}

TEST(LoadSpec, Grammar) {
  auto pt = make_load("point:100", 8);
  EXPECT_EQ(pt[0], 100);
  EXPECT_EQ(total_load(pt), 100);

  auto uni = make_load("uniform:64", 8);
  EXPECT_EQ(uni, Loads(8, 8));

  auto rnd = make_load("random:100:5", 8);
  EXPECT_EQ(total_load(rnd), 100);
  EXPECT_EQ(rnd, make_load("random:100:5", 8));         // seeded
  EXPECT_NE(rnd, make_load("random:100:6", 8));

  EXPECT_THROW(make_load("uniform:13", 8), std::invalid_argument);
  EXPECT_THROW(make_load("point:-1", 8), std::invalid_argument);
  EXPECT_THROW(make_load("nope:1", 8), std::invalid_argument);
}

TEST(LoadSpec, FromFile) {
  const std::string path = "/tmp/diffbal_test_load.txt";
  {
    std::ofstream out(path);
    out << "3\n1\n4\n1\n5\n";
  }
  auto x = make_load("file:" + path, 5);
  EXPECT_EQ(x, (Loads{3, 1, 4, 1, 5}));
  std::remove(path.c_str());
}

TEST(Run, StepsZeroGivesSingleRow) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:8";
  cfg.d_loops = 2;
  cfg.balancer = "send-floor";
  cfg.load = "point:40";
  cfg.steps = "0";
  auto result = run(cfg);
  ASSERT_EQ(result.series.size(), 1u);
  EXPECT_EQ(result.series[0].t, 0);
  EXPECT_EQ(result.series[0].discrepancy, 40);
}

TEST(Run, AutoStepsMatchesSpectralHorizon) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:8";
  cfg.d_loops = 2;
  cfg.balancer = "rotor-router";
  cfg.load = "point:100";
  cfg.steps = "auto";
  auto result = run(cfg);
  EXPECT_EQ(static_cast<std::int64_t>(result.series.size()) - 1,
            result.spectral.balancing_steps(100.0));
}

TEST(Run, DeterministicCsvBytes) {
  ExperimentConfig cfg;
  cfg.graph = "random:32:4:3";
  cfg.d_loops = 4;
  cfg.balancer = "rotor-router";
  cfg.load = "random:512:9";
  cfg.steps = "200";
  cfg.track_potentials = true;
  std::ostringstream a, b;
  emit_csv(run(cfg), a);
  emit_csv(run(cfg), b);
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

TEST(Run, CsvRoundTrip) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:16";
  cfg.d_loops = 2;
  cfg.balancer = "send-round";
  cfg.load = "point:256";
  cfg.steps = "50";
  cfg.track_potentials = true;
  auto result = run(cfg);
  std::ostringstream out;
  emit_csv(result, out);
  EXPECT_EQ(out.str().rfind("t,", 0), 0u);  // first header field is t
  std::istringstream in(out.str());
  auto rows = parse_csv(in);
  ASSERT_EQ(rows.size(), result.series.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i], result.series[i]);
}

TEST(Run, ContinuousBalancesBelowOneByAutoHorizon) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:8";
  cfg.d_loops = 2;
  cfg.balancer = "continuous";
  cfg.load = "point:100";
  cfg.steps = "auto";
  auto result = run(cfg);
  EXPECT_LT(result.series.back().dev_to_avg, 1.0);
  double total = 0;
  for (double v : result.final_real) total += v;
  EXPECT_NEAR(total, 100.0, 1e-9);
}

TEST(Run, AdversarySteadyIsFixedPoint) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:16";
  cfg.d_loops = 0;
  cfg.balancer = "adversary-steady";
  cfg.steps = "10";
  auto result = run(cfg);
  EXPECT_EQ(result.series.front().discrepancy, result.series.back().discrepancy);
  EXPECT_TRUE(result.fairness.round_fair);
  EXPECT_GE(result.series.back().discrepancy, 8);  // d*diam/2
}

TEST(Run, AdversaryRotorOddIsTwoPeriodic) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:9";
  cfg.d_loops = 0;
  cfg.balancer = "adversary-rotor-odd";
  cfg.base_load = 6;
  cfg.steps = "20";
  auto result = run(cfg);
  const auto& s = result.series;
  for (std::size_t t = 2; t < s.size(); ++t) {
    EXPECT_EQ(s[t].max_load, s[t - 2].max_load);
    EXPECT_EQ(s[t].min_load, s[t - 2].min_load);
  }
  EXPECT_NE(s[0].max_load, s[1].max_load);
}

TEST(Run, IncompatibleConfigsRejected) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:8";
  cfg.d_loops = 1;
  cfg.balancer = "send-round";  // needs d+ >= 2d
  cfg.load = "point:10";
  cfg.steps = "5";
  EXPECT_THROW(run(cfg), std::invalid_argument);

  cfg.balancer = "adversary-rotor-odd";  // bipartite cycle(8), also loops != 0
  EXPECT_THROW(run(cfg), std::invalid_argument);
  cfg.d_loops = 0;
  EXPECT_THROW(run(cfg), std::invalid_argument);

  cfg.balancer = "no-such";
  EXPECT_THROW(run(cfg), std::invalid_argument);
}

TEST(Run, SpectralSummaryBeyondDenseCapUsesPowerIteration) {
  ExperimentConfig cfg;
  cfg.graph = "hypercube:11";  // 2048 nodes: simulated fine, dense eig skipped
  cfg.d_loops = 11;
  cfg.balancer = "send-floor";
  cfg.load = "uniform:2048";
  cfg.steps = "1";
  auto result = run(cfg);
  EXPECT_NEAR(result.spectral.lambda2, 20.0 / 22.0, 1e-9);
}

TEST(Run, FlowDumpCompanion) {
  ExperimentConfig cfg;
  cfg.graph = "cycle:4";
  cfg.d_loops = 2;
  cfg.balancer = "send-floor";
  cfg.load = "point:17";
  cfg.steps = "3";
  cfg.flows_output = "/tmp/diffbal_test_flows.csv";
  run(cfg);
  std::ifstream in(cfg.flows_output);
  std::string header;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_EQ(header, "t,node,remainder,f0,f1,f2,f3");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 3 * 4);
  std::remove(cfg.flows_output.c_str());
}

}  // namespace
