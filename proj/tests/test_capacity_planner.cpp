#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "oracles.hpp"
#include "pcnsim/capacity_planner.hpp"
#include "pcnsim/chain_analytics.hpp"

using namespace pcnsim;

namespace {

ChannelGraph with_caps(std::size_t n, std::vector<Channel> e) { return {n, std::move(e)}; }

}  // namespace

TEST(Uniform, EvenSplitAndRemainderByAscendingId) {
  const auto g = with_caps(5, {{0, 1, 10}, {1, 2, 40}, {2, 3, 20}, {3, 4, 30}});
  EXPECT_EQ(redistribute_uniform(g).capacity, (std::vector<Amount>{25, 25, 25, 25}));
  const auto h = with_caps(5, {{0, 1, 12}, {1, 2, 40}, {2, 3, 20}, {3, 4, 30}});
  const auto p = redistribute_uniform(h);
  EXPECT_EQ(p.capacity, (std::vector<Amount>{26, 26, 25, 25}));
  EXPECT_TRUE(p.conserved());
  EXPECT_EQ(p.total_after, 102);
  const auto flat = make_ring(7, 18);
  EXPECT_EQ(redistribute_uniform(flat).capacity, std::vector<Amount>(7, 18));
}

TEST(Uniform, RejectsTooLittleCapacity) {
  const auto g = with_caps(3, {{0, 1, 1}, {1, 2, 2}});
  EXPECT_THROW(redistribute_uniform(g), std::invalid_argument);
}

TEST(Optimized, TwoEdgeExample) {
  const auto g = with_caps(3, {{0, 1, 15}, {1, 2, 15}});
  BetweennessMap bmap{{1.0, 4.0}};
  const auto p = redistribute_xi_optimized(g, bmap);
  EXPECT_EQ(p.capacity, (std::vector<Amount>{10, 20}));
  EXPECT_TRUE(p.conserved());
}

TEST(Optimized, CliqueEqualsUniformAndSingleEdgeTakesAll) {
  Rng rng(61);
  const auto k = with_log_uniform_capacities(make_clique(8, 2), 2, 1000, rng);
  const auto b = edge_betweenness(k);
  EXPECT_EQ(redistribute_xi_optimized(k, b).capacity, redistribute_uniform(k).capacity);
  const auto one = with_caps(2, {{0, 1, 77}});
  EXPECT_EQ(redistribute_xi_optimized(one, edge_betweenness(one)).capacity, (std::vector<Amount>{77}));
}

TEST(Optimized, FloorPinsLowBetweennessEdges) {
  // star: leaves carry g=n-1 each; a pendant path edge far from the hub would get < 2
  const auto g = with_caps(3, {{0, 1, 3}, {1, 2, 3}});
  BetweennessMap bmap{{1e-6, 1000.0}};
  const auto p = redistribute_xi_optimized(g, bmap);
  EXPECT_EQ(p.capacity[0], kMinPlanCapacity);
  EXPECT_TRUE(p.at_floor[0]);
  EXPECT_EQ(p.capacity[1], 4);
  EXPECT_TRUE(p.conserved());
}

TEST(Optimized, RandomGraphsConserveAndRespectFloor) {
  Rng rng(62);
  for (int i = 0; i < 40; ++i) {
    auto g = oracle::random_connected_graph(5 + rng.below(30), 0.15, 2, rng);
    g = with_log_uniform_capacities(g, 2, 5000, rng);
    const auto bmap = edge_betweenness(g);
    for (auto s : {PlanStrategy::uniform, PlanStrategy::xi_optimized}) {
      const auto p = make_plan(g, s, &bmap);
      EXPECT_TRUE(p.conserved());
      EXPECT_EQ(p.total_after, g.total_capacity());
      for (auto c : p.capacity) EXPECT_GE(c, kMinPlanCapacity);
    }
  }
}

TEST(Optimized, XiNeverBelowUniform) {
  Rng rng(63);
  for (int i = 0; i < 30; ++i) {
    auto g = oracle::random_connected_graph(6 + rng.below(40), 0.1, 2, rng);
    g = with_log_uniform_capacities(g, 50, 50000, rng);
    const auto bmap = edge_betweenness(g);
    const double xu = xi_and_bounds(g.with_capacities(redistribute_uniform(g).capacity), bmap).xi;
    const double xo = xi_and_bounds(g.with_capacities(redistribute_xi_optimized(g, bmap).capacity), bmap).xi;
    // rounding can cost at most one unit of capacity on the argmin edge
    EXPECT_GE(xo * 1.05, xu);
  }
}

TEST(Optimized, TargetsEqualizeRatio) {
  Rng rng(64);
  auto g = oracle::random_connected_graph(25, 0.1, 2, rng);
  g = with_log_uniform_capacities(g, 1000, 100000, rng);
  const auto bmap = edge_betweenness(g);
  const auto p = redistribute_xi_optimized(g, bmap);
  double ratio = -1;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (p.at_floor[e]) continue;
    const double r = std::pow(p.target[e] / 2.0, 2) / bmap.value[e];
    if (ratio < 0) ratio = r;
    EXPECT_NEAR(r, ratio, 1e-9 * ratio);
    EXPECT_LE(std::abs(static_cast<double>(p.capacity[e]) - p.target[e]), 1.0);
  }
}

TEST(Plan, CsvRoundTripAndHeader) {
  const auto g = with_caps(3, {{0, 1, 15}, {1, 2, 15}});
  BetweennessMap bmap{{1.0, 4.0}};
  const auto p = redistribute_xi_optimized(g, bmap);
  std::stringstream ss;
  write_plan(ss, base_metadata(), g, p, bmap);
  const auto text = ss.str();
  EXPECT_NE(text.find("# conserved=true"), std::string::npos);
  EXPECT_NE(text.find("edge_id,old_capacity,new_capacity,betweenness,new_ratio\n0,15,10,1,25\n1,15,20,4,25\n"),
            std::string::npos);
  EXPECT_EQ(read_plan_capacities(ss), p.capacity);
}

TEST(Plan, StrategyNames) {
  EXPECT_EQ(parse_plan_strategy("uniform"), PlanStrategy::uniform);
  EXPECT_EQ(parse_plan_strategy("xi_optimized"), PlanStrategy::xi_optimized);
  EXPECT_EQ(parse_plan_strategy("optimized"), PlanStrategy::xi_optimized);
  EXPECT_THROW(parse_plan_strategy("random"), std::invalid_argument);
  const auto g = make_ring(4, 4);
  EXPECT_THROW(make_plan(g, PlanStrategy::xi_optimized, nullptr), std::invalid_argument);
  EXPECT_EQ(make_plan(g, PlanStrategy::original).capacity, std::vector<Amount>(4, 4));
}
