#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pcnsim/sim_core.hpp"

using namespace pcnsim;

namespace {

SimConfig config(std::size_t runs, std::uint64_t seed, StopMode mode = StopMode::depletion, Amount amount = 1) {
  SimConfig c;
  c.runs = runs;
  c.base_seed = seed;
  c.stop_mode = mode;
  c.amount = amount;
  c.workers = 0;
  return c;
}

double mean_tau(const std::vector<RunOutcome>& v) {
  double s = 0;
  for (const auto& o : v) s += static_cast<double>(o.tau);
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(PaymentProcess, TrivialTopologies) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto ring = run_payment_process(make_ring(3, 2), config(1, 0), rng);
    EXPECT_EQ(ring.tau, 1u);
    EXPECT_EQ(ring.kind, FailureKind::depleted);
    EXPECT_TRUE(ring.failing_edge.has_value());
    const auto pair = run_payment_process(make_clique(2, 2), config(1, 0), rng);
    EXPECT_EQ(pair.tau, 1u);
    EXPECT_EQ(*pair.failing_edge, 0u);
  }
}

TEST(PaymentProcess, MeanMatchesExactMarkovChain) {
  // exact expectation by enumerating balance states on small graphs
  const std::vector<ChannelGraph> graphs = {make_path(3, 4), make_ring(4, 4), make_clique(4, 4),
                                            ChannelGraph(4, {{0, 1, 6}, {1, 2, 4}, {1, 3, 4}, {2, 3, 6}})};
  std::uint64_t seed = 100;
  for (const auto& g : graphs) {
    const double exact = oracle::payment_process_mean(g);
    const auto out = monte_carlo(g, config(40000, seed++));
    const auto a = aggregate(out);
    const double se = a.std / std::sqrt(40000.0);
    EXPECT_NEAR(a.mean, exact, 4 * se) << "graph with m=" << g.edge_count();
  }
}

TEST(PaymentProcess, CliqueMatchesMultipleChainsMean) {
  // K_3 with k=2 is three chains; the oracle solves the chain system directly
  const double chains = oracle::multiple_chains_mean(3, 2);
  EXPECT_NEAR(oracle::payment_process_mean(make_clique(3, 4)), chains, 1e-9);
  const auto a = aggregate(monte_carlo(make_clique(3, 4), config(40000, 7)));
  EXPECT_NEAR(a.mean, chains, 4 * a.std / std::sqrt(40000.0));
}

TEST(PaymentProcess, AttemptModeNeverStopsEarlierThanDepletion) {
  Rng grng(3);
  const auto g = with_log_uniform_capacities(make_small_world(40, 2, 0.2, 2, grng), 4, 200, grng);
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng a(s), b(s);
    const auto dep = run_payment_process(g, config(1, 0, StopMode::depletion), a);
    const auto att = run_payment_process(g, config(1, 0, StopMode::attempt_failure), b);
    EXPECT_GE(att.tau, dep.tau);
    EXPECT_EQ(att.kind, FailureKind::attempt_failed);
  }
}

TEST(PaymentProcess, DepletionFlagsInitiallyDepletedEdge) {
  // capacity 1 leaves one side at 0 before any payment
  ChannelGraph g(3, {{0, 1, 1}, {1, 2, 4}});
  Rng rng(1);
  const auto o = run_payment_process(g, config(1, 0), rng);
  EXPECT_EQ(o.tau, 0u);
  EXPECT_EQ(*o.failing_edge, 0u);
}

TEST(PaymentProcess, AmountLargerThanBalances) {
  Rng rng(2);
  const auto o = run_payment_process(make_ring(5, 4), config(1, 0, StopMode::attempt_failure, 3), rng);
  EXPECT_EQ(o.tau, 0u);
  EXPECT_EQ(o.kind, FailureKind::attempt_failed);
}

TEST(PaymentProcess, StepCapIsReportedAsCensored) {
  auto cfg = config(1, 0);
  cfg.max_steps = 5;
  Rng rng(4);
  const auto o = run_payment_process(make_clique(30, 200), cfg, rng);
  EXPECT_EQ(o.tau, 5u);
  EXPECT_TRUE(o.censored());
  EXPECT_FALSE(o.failing_edge.has_value());
}

TEST(PaymentProcess, RejectsDisconnectedGraphs) {
  ChannelGraph g(4, {{0, 1, 2}, {2, 3, 2}});
  Rng rng(5);
  EXPECT_THROW(run_payment_process(g, config(1, 0), rng), std::invalid_argument);
  EXPECT_THROW(monte_carlo(g, config(2, 0)), std::invalid_argument);
}

TEST(PaymentProcess, CheckpointsFire) {
  auto cfg = config(1, 0);
  cfg.max_steps = 1000;
  cfg.checkpoint_every = 100;
  std::vector<std::uint64_t> seen;
  cfg.on_checkpoint = [&](std::uint64_t, std::uint64_t step) { seen.push_back(step); };
  Rng rng(6);
  run_payment_process(make_clique(50, 2000), cfg, rng);
  EXPECT_EQ(seen.size(), 9u);
  EXPECT_EQ(seen.front(), 100u);
}

TEST(Invariants, ConservationAndUnitWalkSteps) {
  // drive the same primitives the engine uses and check every round
  Rng grng(8);
  const auto g = with_log_uniform_capacities(make_small_world(30, 2, 0.3, 2, grng), 40, 400, grng);
  PathSampler sampler(g);
  auto bal = init_balances(g);
  Rng rng(9);
  std::vector<Hop> hops;
  std::vector<Amount> before(g.edge_count());
  for (int t = 0; t < 2000; ++t) {
    for (EdgeId e = 0; e < g.edge_count(); ++e) before[e] = bal.at_v(e) - bal.at_u(e);
    const auto u = static_cast<NodeId>(rng.below(30));
    auto v = static_cast<NodeId>(rng.below(29));
    if (v >= u) ++v;
    sampler.sample(u, v, rng, hops);
    for (const auto& h : hops) bal.transfer(g, h.edge, h.from, 1);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      ASSERT_EQ(bal.at_u(e) + bal.at_v(e), g.capacity(e));
      const Amount step = (bal.at_v(e) - bal.at_u(e)) - before[e];  // 2 X_t(e)
      ASSERT_TRUE(step == 0 || step == 2 || step == -2);
    }
  }
}

TEST(ChainProcesses, TrivialCases) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(s);
    EXPECT_EQ(run_bdc_process(1, 1, 100, rng).tau, 1u);
    EXPECT_EQ(run_bdc_process(3, 1, 100, rng).tau, 1u);
    EXPECT_EQ(run_independent_chains(1, 1, 1.0, 100, rng).tau, 1u);
    const auto c = run_coupled_clique(2, 1, 100, rng);
    EXPECT_EQ(c.payment.tau, 1u);
    EXPECT_EQ(c.chains.tau, 1u);
  }
}

TEST(ChainProcesses, SingleChainMean) {
  const auto a = aggregate(monte_carlo_bdc(1, 10, config(10000, 11)));
  EXPECT_NEAR(a.mean, 100.0, 5.0);
}

TEST(ChainProcesses, MultipleChainsMatchOracle) {
  const double exact = oracle::multiple_chains_mean(3, 3);
  const auto a = aggregate(monte_carlo_bdc(3, 3, config(40000, 12)));
  EXPECT_NEAR(a.mean, exact, 4 * a.std / std::sqrt(40000.0));
}

TEST(ChainProcesses, IndependentChainsMatchOracle) {
  EXPECT_NEAR(oracle::independent_chains_mean(2, 1, 0.5), 4.0 / 3.0, 1e-12);
  const auto small = aggregate(monte_carlo_independent(2, 1, 0.5, config(10000, 13)));
  EXPECT_NEAR(small.mean, 4.0 / 3.0, 0.05 * 4.0 / 3.0);
  for (auto [n, k, p] : {std::tuple{2, 3, 0.3}, std::tuple{3, 2, 0.7}}) {
    const double exact = oracle::independent_chains_mean(static_cast<std::size_t>(n), k, p);
    const auto a = aggregate(monte_carlo_independent(static_cast<std::size_t>(n), k, p, config(40000, 14)));
    EXPECT_NEAR(a.mean, exact, 4 * a.std / std::sqrt(40000.0)) << n << " chains, k=" << k << ", p=" << p;
  }
}

TEST(ChainProcesses, ArgumentChecks) {
  Rng rng(1);
  EXPECT_THROW(run_bdc_process(0, 1, 10, rng), std::invalid_argument);
  EXPECT_THROW(run_independent_chains(2, 1, 0.0, 10, rng), std::invalid_argument);
  EXPECT_THROW(run_independent_chains(2, 1, 1.5, 10, rng), std::invalid_argument);
  EXPECT_THROW(run_coupled_clique(1, 1, 10, rng), std::invalid_argument);
}

TEST(Coupling, ExactForManySeeds) {
  for (std::size_t n : {3, 10, 20}) {
    for (std::int64_t k : {1, 4, 8}) {
      for (std::uint64_t s = 0; s < 40; ++s) {
        Rng rng(derive_seed(99, s));
        const auto c = run_coupled_clique(n, k, kDefaultMaxSteps, rng);
        ASSERT_EQ(c.payment.tau, c.chains.tau);
        ASSERT_EQ(c.payment.failing_edge, c.chains.failing_edge);
      }
    }
  }
}

TEST(Coupling, FaultInjectionBreaksEquality) {
  std::size_t mismatches = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    Rng rng(s);
    const auto c = run_coupled_clique(10, 4, kDefaultMaxSteps, rng, CouplingFault::flip_orientation_on_odd_rounds);
    if (c.payment.tau != c.chains.tau) ++mismatches;
  }
  EXPECT_GT(mismatches, 20u);
}

TEST(Coupling, CliqueFailureLawMatchesChainProcess) {
  // distribution-level check of the coupling: clique payment process vs m chains
  const std::size_t n = 6;
  const std::int64_t k = 3;
  const auto pay = aggregate(monte_carlo(make_clique(n, 2 * k), config(20000, 15)));
  const auto chains = aggregate(monte_carlo_bdc(n * (n - 1) / 2, k, config(20000, 16)));
  const double se = std::sqrt(pay.std * pay.std + chains.std * chains.std) / std::sqrt(20000.0);
  EXPECT_NEAR(pay.mean, chains.mean, 4 * se);
}

TEST(MonteCarlo, DeterministicAcrossRerunsAndWorkers) {
  Rng grng(17);
  const auto g = make_small_world(60, 2, 0.2, 12, grng);
  auto cfg = config(24, 5);
  cfg.workers = 1;
  const auto ref = monte_carlo(g, cfg);
  for (unsigned w : {1u, 2u, 3u, 7u, 0u}) {
    cfg.workers = w;
    EXPECT_EQ(monte_carlo(g, cfg), ref);
  }
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(ref[i].seed, derive_seed(5, i));
}

TEST(MonteCarlo, CliqueCampaignSummary) {
  const auto out = run_uniform_campaign({TopologyKind::clique, 200, nullptr, std::nullopt}, 16, config(10, 18));
  ASSERT_EQ(out.size(), 10u);
  const auto a = aggregate(out);
  EXPECT_LE(a.min, a.mean);
  EXPECT_LE(a.mean, a.max);
}

TEST(MonteCarlo, WorkerExceptionsPropagate) {
  EXPECT_THROW(run_replicas(8, 1, 4,
                            [] {
                              return [](Rng& rng) -> RunOutcome {
                                if (rng.below(2) == 0) throw std::runtime_error("boom");
                                return {};
                              };
                            }),
               std::runtime_error);
}

TEST(Sweep, PointsAndMonotoneTrend) {
  const auto single = capacity_sweep({TopologyKind::ring, 16, nullptr, std::nullopt}, 4, 4, 1, config(5, 19));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].k, 4);
  EXPECT_EQ(capacity_sweep({TopologyKind::ring, 16, nullptr, std::nullopt}, 10, 30, 10, config(5, 19)).size(), 3u);
  const auto ind = capacity_sweep({TopologyKind::independent_chains, 64, nullptr, std::nullopt}, 4, 16, 6, config(200, 20));
  ASSERT_EQ(ind.size(), 3u);
  EXPECT_LT(ind[0].summary.mean, ind[1].summary.mean);
  EXPECT_LT(ind[1].summary.mean, ind[2].summary.mean);
  EXPECT_THROW(capacity_sweep({TopologyKind::ring, 16, nullptr, std::nullopt}, 5, 4, 1, config(1, 1)), std::invalid_argument);
}

TEST(MultiAmount, SingleAmountEqualsMonteCarloAndLargerAmountFailsSooner) {
  const auto g = make_clique(12, 40);
  const Amount one[] = {1};
  const auto cfg = config(30, 21, StopMode::attempt_failure);
  EXPECT_EQ(multi_amount_experiment(g, one, cfg)[0].outcomes, monte_carlo(g, cfg));
  const Amount amounts[] = {1, 2, 5};
  const auto res = multi_amount_experiment(g, amounts, config(300, 22, StopMode::attempt_failure));
  ASSERT_EQ(res.size(), 3u);
  EXPECT_GE(mean_tau(res[0].outcomes), mean_tau(res[1].outcomes));
  EXPECT_GE(mean_tau(res[1].outcomes), mean_tau(res[2].outcomes));
}
