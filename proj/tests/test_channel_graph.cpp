#include <gtest/gtest.h>

#include <sstream>

#include "pcnsim/channel_graph.hpp"

using namespace pcnsim;

TEST(ChannelGraph, NormalizesEndpointsAndKeepsInputOrder) {
  ChannelGraph g(4, {{2, 0, 10}, {1, 3, 6}, {0, 1, 4}});
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(g.edge(0).u, 0u);
  EXPECT_EQ(g.edge(0).v, 2u);
  EXPECT_EQ(g.capacity(1), 6);
  EXPECT_EQ(g.total_capacity(), 20);
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_EQ(*g.find_edge(2, 0), 0u);
  EXPECT_EQ(*g.find_edge(3, 1), 1u);
  EXPECT_FALSE(g.find_edge(2, 3).has_value());
  EXPECT_FALSE(g.find_edge(0, 9).has_value());
  auto nb = g.neighbors(0);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0].neighbor, 1u);
  EXPECT_EQ(nb[1].neighbor, 2u);
}

TEST(ChannelGraph, RejectsInvalidEdges) {
  EXPECT_THROW(ChannelGraph(3, {{1, 1, 2}}), std::invalid_argument);
  EXPECT_THROW(ChannelGraph(3, {{0, 1, 2}, {1, 0, 4}}), std::invalid_argument);
  EXPECT_THROW(ChannelGraph(3, {{0, 3, 2}}), std::invalid_argument);
  EXPECT_THROW(ChannelGraph(3, {{0, 1, 0}}), std::invalid_argument);
}

TEST(ChannelGraph, Generators) {
  const auto k5 = make_clique(5, 8);
  EXPECT_EQ(k5.edge_count(), 10u);
  EXPECT_TRUE(k5.is_complete());
  for (const auto& c : k5.edges()) EXPECT_EQ(c.capacity, 8);
  EXPECT_THROW(make_clique(5, 7), std::invalid_argument);
  EXPECT_THROW(make_clique(1, 2), std::invalid_argument);

  const auto r = make_ring(6, 3);
  EXPECT_EQ(r.edge_count(), 6u);
  for (NodeId x = 0; x < 6; ++x) EXPECT_EQ(r.degree(x), 2u);
  EXPECT_TRUE(r.find_edge(5, 0).has_value());
  EXPECT_THROW(make_ring(2, 2), std::invalid_argument);

  const auto p = make_path(4, 2);
  EXPECT_EQ(p.edge_count(), 3u);
  EXPECT_EQ(p.degree(0), 1u);
}

TEST(ChannelGraph, SmallWorldKeepsEdgeCountAndSimplicity) {
  Rng rng(11);
  for (double rewire : {0.0, 0.3, 1.0}) {
    const auto g = make_small_world(50, 3, rewire, 4, rng);
    EXPECT_EQ(g.edge_count(), 150u);  // constructor would throw on loops or parallels
  }
  Rng a(5), b(5);
  const auto g1 = make_small_world(40, 2, 0.2, 2, a);
  const auto g2 = make_small_world(40, 2, 0.2, 2, b);
  for (EdgeId e = 0; e < g1.edge_count(); ++e) {
    EXPECT_EQ(g1.edge(e).u, g2.edge(e).u);
    EXPECT_EQ(g1.edge(e).v, g2.edge(e).v);
  }
}

TEST(ChannelGraph, LogUniformCapacitiesStayInRange) {
  Rng rng(12);
  const auto g = with_log_uniform_capacities(make_ring(500, 2), 100, 1000000, rng);
  int low_decade = 0;
  for (const auto& c : g.edges()) {
    EXPECT_GE(c.capacity, 100);
    EXPECT_LE(c.capacity, 1000000);
    if (c.capacity < 1000) ++low_decade;
  }
  // a quarter of the mass per decade
  EXPECT_NEAR(low_decade / 500.0, 0.25, 0.08);
}

TEST(BalanceState, EvenSplitAndOddFloorToSmallerId) {
  ChannelGraph g(3, {{1, 0, 7}, {1, 2, 8}});
  auto b = init_balances(g);
  EXPECT_EQ(b.at_u(0), 3);  // node 0
  EXPECT_EQ(b.at_v(0), 4);
  EXPECT_EQ(b.min_side(1), 4);
  b.transfer(g, 0, 1, 2);
  EXPECT_EQ(b.outgoing(g, 0, 1), 2);
  EXPECT_EQ(b.outgoing(g, 0, 0), 5);
  EXPECT_EQ(b.at_u(0) + b.at_v(0), 7);
}

TEST(Components, GiantComponentAndTies) {
  // components {0,1,2}, {3,4}, {5,6,7}: tie broken towards the one holding node 0
  ChannelGraph g(8, {{0, 1, 2}, {1, 2, 2}, {3, 4, 2}, {5, 6, 2}, {6, 7, 2}});
  std::size_t count = 0;
  auto labels = component_labels(g, &count);
  EXPECT_EQ(count, 3u);
  EXPECT_EQ(labels[2], 0u);
  EXPECT_EQ(labels[7], 2u);
  EXPECT_FALSE(is_connected(g));
  const auto giant = giant_component(g);
  EXPECT_EQ(giant.graph.node_count(), 3u);
  EXPECT_EQ(giant.original_ids, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_TRUE(is_connected(giant.graph));

  ChannelGraph h(6, {{4, 5, 2}, {3, 4, 2}, {0, 1, 2}});
  const auto big = giant_component(h);
  EXPECT_EQ(big.original_ids, (std::vector<NodeId>{3, 4, 5}));
  EXPECT_EQ(big.graph.edge(0).u, 1u);
  EXPECT_EQ(big.graph.edge(0).v, 2u);
}

TEST(EdgeList, RoundTrip) {
  ChannelGraph g(4, {{0, 1, 5}, {1, 2, 9}, {2, 3, 11}});
  std::stringstream ss;
  write_edge_list(ss, g);
  std::stringstream with_comments("# generated\n" + ss.str());
  const auto back = read_edge_list(with_comments);
  ASSERT_EQ(back.edge_count(), 3u);
  for (EdgeId e = 0; e < 3; ++e) {
    EXPECT_EQ(back.edge(e).u, g.edge(e).u);
    EXPECT_EQ(back.edge(e).v, g.edge(e).v);
    EXPECT_EQ(back.capacity(e), g.capacity(e));
  }
}

TEST(EdgeList, ReportsMalformedInput) {
  std::stringstream missing("3 2\n0 1 4\n");
  EXPECT_THROW(read_edge_list(missing), std::invalid_argument);
  std::stringstream bad("3 1\n0 x 4\n");
  EXPECT_THROW(read_edge_list(bad), std::invalid_argument);
  std::stringstream empty("");
  EXPECT_THROW(read_edge_list(empty), std::invalid_argument);
}

TEST(ChannelGraph, RingAndCliqueShapes) {
  const auto r4 = make_ring(4, 2);
  EXPECT_TRUE(r4.find_edge(0, 1) && r4.find_edge(1, 2) && r4.find_edge(2, 3) && r4.find_edge(0, 3));
  EXPECT_EQ(make_ring(4096, 3040).edge_count(), 4096u);
  const auto k6 = make_clique(6, 2);
  for (NodeId x = 0; x < 6; ++x) EXPECT_EQ(k6.degree(x), 5u);
}

TEST(ChannelGraph, AdjacencyLengthsSumToTwiceEdges) {
  Rng rng(21);
  for (int i = 0; i < 5; ++i) {
    const auto g = make_small_world(60, 2, 0.3, 2, rng);
    std::size_t total = 0;
    for (NodeId x = 0; x < g.node_count(); ++x) total += g.neighbors(x).size();
    EXPECT_EQ(total, 2 * g.edge_count());
  }
}

TEST(BalanceState, InitialSplitExamples) {
  ChannelGraph g(10, {{0, 1, 10}, {2, 9, 7}, {3, 4, 1}});
  const auto b = init_balances(g);
  EXPECT_EQ(b.at_u(0), 5);
  EXPECT_EQ(b.at_v(0), 5);
  EXPECT_EQ(b.outgoing(g, 1, 2), 3);
  EXPECT_EQ(b.outgoing(g, 1, 9), 4);
  EXPECT_EQ(b.at_u(2), 0);
  EXPECT_EQ(b.at_v(2), 1);
  for (EdgeId e = 0; e < g.edge_count(); ++e) EXPECT_EQ(b.at_u(e) + b.at_v(e), g.capacity(e));
}

TEST(Components, FiveBeatsThreeAndConnectedIsIdentity) {
  ChannelGraph g(8, {{0, 1, 2}, {1, 2, 2}, {3, 4, 2}, {4, 5, 2}, {5, 6, 2}, {6, 7, 2}});
  const auto giant = giant_component(g);
  EXPECT_EQ(giant.graph.node_count(), 5u);
  EXPECT_EQ(giant.original_ids.front(), 3u);
  const auto again = giant_component(giant.graph);
  EXPECT_EQ(again.graph.node_count(), 5u);
  EXPECT_EQ(again.graph.edge_count(), giant.graph.edge_count());
}
