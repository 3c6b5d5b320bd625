#include "diffbal/graph.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace diffbal;

namespace {

void expect_simple_regular(const RegularGraph& g) {
  ASSERT_NO_THROW(validate(g));
  for (int u = 0; u < g.n; ++u) {
    std::set<int> uniq(g.adj[u].begin(), g.adj[u].end());
    EXPECT_EQ(static_cast<int>(uniq.size()), g.degree);
    EXPECT_EQ(uniq.count(u), 0u);
    for (int v : g.adj[u]) {
      EXPECT_TRUE(std::binary_search(g.adj[v].begin(), g.adj[v].end(), u));
    }
  }
}

TEST(Cycle, BasicStructure) {
  auto g = make_cycle(5);
  expect_simple_regular(g);
  EXPECT_EQ(g.degree, 2);
  EXPECT_EQ(diameter(g), 2);
  EXPECT_EQ(odd_girth(g).value(), 5);

  auto g3 = make_cycle(3);
  EXPECT_EQ(g3.adj[0], (std::vector<int>{1, 2}));

  auto g6 = make_cycle(6);
  EXPECT_FALSE(odd_girth(g6).has_value());

  EXPECT_THROW(make_cycle(2), std::invalid_argument);
}

TEST(Torus, BasicStructure) {
  auto g = make_torus(4, 2);
  EXPECT_EQ(g.n, 16);
  EXPECT_EQ(g.degree, 4);
  expect_simple_regular(g);

  // side=3, r=1 degenerates to the triangle
  auto t = make_torus(3, 1);
  auto c = make_cycle(3);
  EXPECT_EQ(t.adj, c.adj);

  auto g9 = make_torus(3, 2);
  expect_simple_regular(g9);
  for (int u = 0; u < g9.n; ++u) {
    std::set<int> uniq(g9.adj[u].begin(), g9.adj[u].end());
    EXPECT_EQ(uniq.size(), 4u);
  }

  EXPECT_THROW(make_torus(2, 2), std::invalid_argument);
}

TEST(Hypercube, BasicStructure) {
  auto g = make_hypercube(3);
  EXPECT_EQ(g.n, 8);
  EXPECT_EQ(g.degree, 3);
  expect_simple_regular(g);
  EXPECT_EQ(diameter(g), 3);
  EXPECT_FALSE(odd_girth(g).has_value());

  auto g1 = make_hypercube(1);
  EXPECT_EQ(g1.n, 2);
  EXPECT_EQ(g1.adj[0], std::vector<int>{1});

  auto g2 = make_hypercube(2);
  EXPECT_EQ(g2.degree, 2);
  EXPECT_EQ(diameter(g2), 2);  // 4-cycle
}

TEST(RandomRegular, ForcedCompleteGraph) {
  // K4 is the only 3-regular graph on 4 nodes.
  auto g = make_random_regular(4, 3, 7);
  expect_simple_regular(g);
  for (int u = 0; u < 4; ++u) EXPECT_EQ(static_cast<int>(g.adj[u].size()), 3);
}

TEST(RandomRegular, ConnectedAndDeterministic) {
  auto g1 = make_random_regular(128, 4, 1);
  auto g2 = make_random_regular(128, 4, 1);
  expect_simple_regular(g1);
  EXPECT_TRUE(is_connected(g1));
  EXPECT_EQ(g1.adj, g2.adj);

  auto g3 = make_random_regular(128, 4, 2);
  EXPECT_NE(g1.adj, g3.adj);
}

TEST(RandomRegular, RejectsOddStubCount) {
  EXPECT_THROW(make_random_regular(5, 3, 1), std::invalid_argument);
}

TEST(CirculantClique, Structure) {
  auto g = make_circulant_clique(8, 4);
  expect_simple_regular(g);
  EXPECT_EQ(g.adj[0], (std::vector<int>{1, 2, 6, 7}));
  // C = {0,1} is a clique
  EXPECT_TRUE(std::binary_search(g.adj[0].begin(), g.adj[0].end(), 1));

  auto g6 = make_circulant_clique(6, 3);
  std::set<int> nb(g6.adj[0].begin(), g6.adj[0].end());
  EXPECT_EQ(nb, (std::set<int>{1, 3, 5}));

  auto g4 = make_circulant_clique(4, 2);
  auto c4 = make_cycle(4);
  EXPECT_EQ(g4.adj, c4.adj);

  EXPECT_THROW(make_circulant_clique(7, 4), std::invalid_argument);
  EXPECT_THROW(make_circulant_clique(4, 4), std::invalid_argument);
}

TEST(CirculantClique, CliqueIsComplete) {
  for (int d : {4, 6, 8}) {
    auto g = make_circulant_clique(16, d);
    int c = d / 2;
    for (int i = 0; i < c; ++i)
      for (int j = i + 1; j < c; ++j)
        EXPECT_TRUE(std::binary_search(g.adj[i].begin(), g.adj[i].end(), j))
            << "d=" << d << " " << i << "-" << j;
  }
}

TEST(Augment, CanonicalPortOrder) {
  auto bg = augment(make_cycle(3), 2);
  EXPECT_EQ(bg.d_plus(), 4);
  EXPECT_EQ(bg.port_target(0, 0), 1);
  EXPECT_EQ(bg.port_target(0, 1), 2);
  EXPECT_EQ(bg.port_target(0, 2), 0);
  EXPECT_EQ(bg.port_target(0, 3), 0);
  EXPECT_FALSE(bg.is_loop_port(1));
  EXPECT_TRUE(bg.is_loop_port(2));

  auto plain = augment(make_cycle(5), 0);
  EXPECT_EQ(plain.d_plus(), 2);

  auto cube = augment(make_hypercube(3), 3);
  EXPECT_EQ(cube.d_plus(), 6);
}

TEST(Queries, DistanceLabeling) {
  auto g = make_cycle(8);
  auto lab = distance_labeling(g, 0);
  EXPECT_EQ(lab.dist, (std::vector<int>{0, 1, 2, 3, 4, 3, 2, 1}));
  EXPECT_EQ(eccentricity(g, 0), 4);
}

TEST(Queries, LabelingEdgeLipschitz) {
  std::vector<RegularGraph> graphs;
  graphs.push_back(make_cycle(9));
  graphs.push_back(make_torus(4, 2));
  graphs.push_back(make_hypercube(4));
  graphs.push_back(make_random_regular(40, 4, 3));
  graphs.push_back(make_circulant_clique(12, 6));
  for (const auto& g : graphs) {
    for (int s = 0; s < g.n; ++s) {
      auto lab = distance_labeling(g, s);
      for (int u = 0; u < g.n; ++u)
        for (int v : g.adj[u]) EXPECT_LE(std::abs(lab.dist[u] - lab.dist[v]), 1);
    }
  }
}

// On a graph of odd girth 2*phi+1, an equal-level edge can only occur at
// level >= phi.
TEST(Queries, EqualLevelEdgesRespectOddGirth) {
  std::vector<RegularGraph> graphs;
  for (int n : {5, 7, 9, 15, 33, 63}) graphs.push_back(make_cycle(n));
  graphs.push_back(make_circulant_clique(12, 6));
  graphs.push_back(make_random_regular(48, 3, 11));
  for (const auto& g : graphs) {
    auto og = odd_girth(g);
    if (!og) continue;
    int phi = (og.value() - 1) / 2;
    for (int s = 0; s < g.n && s < 64; ++s) {
      auto dist = bfs_distances(g, s);
      for (int u = 0; u < g.n; ++u)
        for (int v : g.adj[u]) {
          if (dist[u] == dist[v]) {
            EXPECT_GE(dist[u], phi);
          }
        }
    }
  }
}

TEST(Queries, OddGirthRootLiesOnShortestOddCycle) {
  auto g = make_circulant_clique(16, 5);
  auto info = odd_girth_info(g);
  ASSERT_TRUE(info.has_value());
  // Root must witness its own girth: some equal-level edge at level (len-1)/2.
  auto dist = bfs_distances(g, info->root);
  int phi = (info->length - 1) / 2;
  bool witness = false;
  for (int u = 0; u < g.n && !witness; ++u)
    for (int v : g.adj[u])
      if (dist[u] == phi && dist[v] == phi) witness = true;
  EXPECT_TRUE(witness);
}

TEST(TextFormat, RoundTrip) {
  auto g = make_random_regular(24, 3, 5);
  std::stringstream ss;
  write_graph(ss, g, 3);
  auto bg = read_graph(ss);
  EXPECT_EQ(bg.base.adj, g.adj);
  EXPECT_EQ(bg.d_loops, 3);
}

TEST(TextFormat, RejectsAsymmetricInput) {
  // node 0 lists 1 but node 1 does not list 0
  std::stringstream ss("3 1 0\n0 1\n1 2\n2 1\n");
  EXPECT_THROW(read_graph(ss), std::invalid_argument);
}

TEST(TextFormat, RejectsTruncatedInput) {
  std::stringstream ss("3 2 0\n0 1 2\n1 0\n");
  EXPECT_THROW(read_graph(ss), std::runtime_error);
}

}  // namespace
