#pragma once

// Random payment process, the multiple birth-and-death chains process, their
// exact coupling on the clique, the independent-chains system, and
// replicated Monte Carlo campaigns.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pcnsim/chain_analytics.hpp"
#include "pcnsim/channel_graph.hpp"
#include "pcnsim/outcome.hpp"
#include "pcnsim/path_engine.hpp"
#include "pcnsim/results_io.hpp"
#include "pcnsim/rng.hpp"

namespace pcnsim {

enum class StopMode {
  depletion,        // stop after the first round leaving some b_min(e) < amount
  attempt_failure,  // stop at the first drawn payment that cannot be applied
};

inline std::string_view to_string(StopMode m) noexcept {
  return m == StopMode::depletion ? "depletion" : "attempt";
}

inline StopMode parse_stop_mode(const std::string& s) {
  if (s == "depletion") return StopMode::depletion;
  if (s == "attempt" || s == "attempt_failure") return StopMode::attempt_failure;
  throw std::invalid_argument("unknown stop mode '" + s + "' (valid: depletion, attempt)");
}

inline constexpr std::uint64_t kDefaultMaxSteps = 1'000'000'000'000ULL;
inline constexpr std::uint64_t kDefaultCheckpoint = 100'000'000ULL;

/// Called every `checkpoint_every` rounds of a single run with (run seed, round).
using CheckpointFn = std::function<void(std::uint64_t, std::uint64_t)>;

struct SimConfig {
  Amount amount{1};
  StopMode stop_mode{StopMode::depletion};
  std::uint64_t max_steps{kDefaultMaxSteps};
  std::uint64_t base_seed{0};
  std::size_t runs{1};
  unsigned workers{1};  // 0 = hardware concurrency
  std::uint64_t checkpoint_every{kDefaultCheckpoint};
  CheckpointFn on_checkpoint;

  void validate() const {
    if (amount < 1) throw std::invalid_argument("amount must be >= 1");
    if (max_steps == 0) throw std::invalid_argument("max_steps must be > 0");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  }
};

namespace detail {

inline void checkpoint(const SimConfig& cfg, const Rng& rng, std::uint64_t step) {
  if (cfg.on_checkpoint && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
    cfg.on_checkpoint(rng.seed(), step);
}

}  // namespace detail

/// One run of the random payment process. Each round draws an ordered pair
/// of distinct nodes uniformly, a uniform shortest path between them, and
/// pays `amount` along it.
inline RunOutcome run_payment_process(PathSampler& sampler, const SimConfig& cfg, Rng& rng) {
  const ChannelGraph& g = sampler.graph();
  const std::size_t n = g.node_count();
  if (n < 2) throw std::invalid_argument("run_payment_process: graph needs >= 2 nodes");
  const Amount x = cfg.amount;
  auto bal = init_balances(g);
  RunOutcome out;
  out.seed = rng.seed();
  if (cfg.stop_mode == StopMode::depletion) {
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      if (bal.min_side(e) < x) {
        out.tau = 0;
        out.failing_edge = e;
        out.kind = FailureKind::depleted;
        return out;
      }
    }
  }
  std::vector<Hop> hops;
  for (std::uint64_t t = 0; t < cfg.max_steps; ++t) {
    if (t > 0) detail::checkpoint(cfg, rng, t);
    const auto u = static_cast<NodeId>(rng.below(n));
    auto v = static_cast<NodeId>(rng.below(n - 1));
    if (v >= u) ++v;
    sampler.sample(u, v, rng, hops);
    if (cfg.stop_mode == StopMode::attempt_failure) {
      for (const auto& h : hops) {
        if (bal.outgoing(g, h.edge, h.from) < x) {
          out.tau = t;
          out.failing_edge = h.edge;
          out.kind = FailureKind::attempt_failed;
          return out;
        }
      }
    }
    for (const auto& h : hops) bal.transfer(g, h.edge, h.from, x);
    if (cfg.stop_mode == StopMode::depletion) {
      for (const auto& h : hops) {
        if (bal.min_side(h.edge) < x) {
          out.tau = t + 1;
          out.failing_edge = h.edge;
          out.kind = FailureKind::depleted;
          return out;
        }
      }
    }
  }
  out.tau = cfg.max_steps;
  out.kind = FailureKind::step_cap_reached;
  return out;
}

inline RunOutcome run_payment_process(const ChannelGraph& g, const SimConfig& cfg, Rng& rng) {
  if (!is_connected(g)) throw std::invalid_argument("run_payment_process: graph is disconnected");
  PathSampler sampler(g);
  return run_payment_process(sampler, cfg, rng);
}

/// m unbiased chains on [-k, k] starting at 0; each round moves one
/// uniformly chosen chain by +-1. Stops at the first chain reaching +-k.
inline RunOutcome run_bdc_process(std::size_t m, std::int64_t k, std::uint64_t max_steps, Rng& rng) {
  if (m < 1 || k < 1) throw std::invalid_argument("run_bdc_process: need m >= 1 and k >= 1");
  std::vector<std::int64_t> pos(m, 0);
  RunOutcome out;
  out.seed = rng.seed();
  for (std::uint64_t t = 0; t < max_steps; ++t) {
    const auto e = static_cast<EdgeId>(rng.below(m));
    pos[e] += rng.coin() ? 1 : -1;
    if (pos[e] == k || pos[e] == -k) {
      out.tau = t + 1;
      out.failing_edge = e;
      out.kind = FailureKind::depleted;
      return out;
    }
  }
  out.tau = max_steps;
  return out;
}

struct CoupledOutcome {
  RunOutcome payment;  // random payment process on K_n
  RunOutcome chains;   // multiple chains process with m = n(n-1)/2
};

/// Fault injected into the chain side of the coupling, for negative controls.
enum class CouplingFault { none, flip_orientation_on_odd_rounds };

/// Runs both processes from one random stream. Round t draws (u, v); the
/// payment side pays one unit over edge {u, v}; the chain side moves chain
/// f({u, v}) by +1 if (u, v) agrees with the fixed orientation (low id ->
/// high id), else -1. f maps edge id e to chain m-1-e.
inline CoupledOutcome run_coupled_clique(std::size_t n, std::int64_t k, std::uint64_t max_steps, Rng& rng,
                                         CouplingFault fault = CouplingFault::none) {
  if (n < 2) throw std::invalid_argument("run_coupled_clique: n must be >= 2");
  if (k < 1) throw std::invalid_argument("run_coupled_clique: k must be >= 1");
  const ChannelGraph g = make_clique(n, 2 * k);
  const std::size_t m = g.edge_count();
  auto bal = init_balances(g);
  std::vector<std::int64_t> chain(m, 0);
  CoupledOutcome out;
  out.payment.seed = out.chains.seed = rng.seed();
  bool pay_done = false, chain_done = false;
  std::uint64_t t = 0;
  for (; t < max_steps && !(pay_done && chain_done); ++t) {
    const auto u = static_cast<NodeId>(rng.below(n));
    auto v = static_cast<NodeId>(rng.below(n - 1));
    if (v >= u) ++v;
    const EdgeId e = *g.find_edge(u, v);
    if (!pay_done) {
      bal.transfer(g, e, u, 1);
      if (bal.min_side(e) == 0) {
        pay_done = true;
        out.payment = {t + 1, e, FailureKind::depleted, rng.seed()};
      }
    }
    if (!chain_done) {
      const std::size_t c = m - 1 - e;
      std::int64_t step = u < v ? 1 : -1;
      if (fault == CouplingFault::flip_orientation_on_odd_rounds && (t & 1)) step = -step;
      chain[c] += step;
      if (chain[c] == k || chain[c] == -k) {
        chain_done = true;
        out.chains = {t + 1, static_cast<EdgeId>(m - 1 - c), FailureKind::depleted, rng.seed()};
      }
    }
  }
  if (!pay_done) out.payment = {max_steps, std::nullopt, FailureKind::step_cap_reached, rng.seed()};
  if (!chain_done) out.chains = {max_steps, std::nullopt, FailureKind::step_cap_reached, rng.seed()};
  return out;
}

/// n independent unbiased chains on [-k, k]; every round each chain moves
/// (+-1) independently with probability p_select. Selected chains are found
/// by geometric gap sampling. Stops after the first round in which some
/// chain reaches +-k (smallest such index reported).
inline RunOutcome run_independent_chains(std::size_t n, std::int64_t k, double p_select, std::uint64_t max_steps, Rng& rng) {
  if (n < 1 || k < 1) throw std::invalid_argument("run_independent_chains: need n >= 1 and k >= 1");
  if (!(p_select > 0.0 && p_select <= 1.0)) throw std::invalid_argument("run_independent_chains: p_select must be in (0, 1]");
  std::vector<std::int64_t> pos(n, 0);
  const double log_q = p_select < 1.0 ? std::log1p(-p_select) : 0.0;
  auto gap = [&]() -> std::size_t {
    if (p_select >= 1.0) return 0;
    const double skip = std::floor(std::log(rng.uniform_pos()) / log_q);
    return skip >= static_cast<double>(n) ? n : static_cast<std::size_t>(skip);
  };
  RunOutcome out;
  out.seed = rng.seed();
  for (std::uint64_t t = 0; t < max_steps; ++t) {
    std::optional<EdgeId> hit;
    for (std::size_t i = gap(); i < n; i += 1 + gap()) {
      pos[i] += rng.coin() ? 1 : -1;
      if (!hit && (pos[i] == k || pos[i] == -k)) hit = static_cast<EdgeId>(i);
    }
    if (hit) {
      out.tau = t + 1;
      out.failing_edge = hit;
      out.kind = FailureKind::depleted;
      return out;
    }
  }
  out.tau = max_steps;
  return out;
}

// ---------------------------------------------------------------------------
// Campaigns

/// Runs `runs` replicas; replica i uses seed derive_seed(base_seed, i) and
/// lands at index i regardless of which worker executed it.
/// `make_worker()` is called once per worker thread and must return a
/// callable RunOutcome(Rng&) (so per-worker caches can be kept).
template <class MakeWorker>
std::vector<RunOutcome> run_replicas(std::size_t runs, std::uint64_t base_seed, unsigned workers, MakeWorker make_worker) {
  std::vector<RunOutcome> out(runs);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, runs));
  if (workers <= 1) {
    auto run = make_worker();
    for (std::size_t i = 0; i < runs; ++i) {
      Rng rng(derive_seed(base_seed, i));
      out[i] = run(rng);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        auto run = make_worker();
        for (std::size_t i; (i = next.fetch_add(1)) < runs;) {
          Rng rng(derive_seed(base_seed, i));
          out[i] = run(rng);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = runs;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

inline std::vector<RunOutcome> monte_carlo(const ChannelGraph& g, const SimConfig& cfg) {
  cfg.validate();
  if (!is_connected(g)) throw std::invalid_argument("monte_carlo: graph is disconnected");
  return run_replicas(cfg.runs, cfg.base_seed, cfg.workers, [&] {
    return [&, sampler = std::make_shared<PathSampler>(g)](Rng& rng) { return run_payment_process(*sampler, cfg, rng); };
  });
}

inline std::vector<RunOutcome> monte_carlo_bdc(std::size_t m, std::int64_t k, const SimConfig& cfg) {
  cfg.validate();
  return run_replicas(cfg.runs, cfg.base_seed, cfg.workers, [&] {
    return [&](Rng& rng) { return run_bdc_process(m, k, cfg.max_steps, rng); };
  });
}

inline std::vector<RunOutcome> monte_carlo_independent(std::size_t n, std::int64_t k, double p_select, const SimConfig& cfg) {
  cfg.validate();
  return run_replicas(cfg.runs, cfg.base_seed, cfg.workers, [&] {
    return [&](Rng& rng) { return run_independent_chains(n, k, p_select, cfg.max_steps, rng); };
  });
}

enum class TopologyKind { clique, ring, independent_chains, graph };

inline std::string_view to_string(TopologyKind t) noexcept {
  switch (t) {
    case TopologyKind::clique: return "clique";
    case TopologyKind::ring: return "ring";
    case TopologyKind::independent_chains: return "independent";
    case TopologyKind::graph: return "graph";
  }
  return "?";
}

/// What a campaign runs on. For `graph`, capacities are replaced by the
/// uniform per-side balance being swept.
struct TopologySpec {
  TopologyKind kind{TopologyKind::clique};
  std::size_t nodes{0};
  const ChannelGraph* graph{nullptr};
  std::optional<double> p_select;  // independent chains; default ring_edge_probability(nodes)
};

/// Campaign at uniform per-side balance k (capacity 2k on every edge).
inline std::vector<RunOutcome> run_uniform_campaign(const TopologySpec& topo, std::int64_t k, const SimConfig& cfg) {
  if (k < 1) throw std::invalid_argument("per-side balance k must be >= 1");
  switch (topo.kind) {
    case TopologyKind::clique: return monte_carlo(make_clique(topo.nodes, 2 * k), cfg);
    case TopologyKind::ring: return monte_carlo(make_ring(topo.nodes, 2 * k), cfg);
    case TopologyKind::independent_chains:
      return monte_carlo_independent(topo.nodes, k, topo.p_select.value_or(ring_edge_probability(topo.nodes)), cfg);
    case TopologyKind::graph:
      if (!topo.graph) throw std::invalid_argument("graph topology without a graph");
      return monte_carlo(topo.graph->with_uniform_capacity(2 * k), cfg);
  }
  throw std::logic_error("unreachable");
}

struct SweepPoint {
  std::int64_t k{0};
  std::vector<RunOutcome> outcomes;
  Aggregate summary;
};

/// Monte Carlo at every per-side balance k_from, k_from + k_step, ..., <= k_to.
/// Every point reuses the same replica seeds.
inline std::vector<SweepPoint> capacity_sweep(const TopologySpec& topo, std::int64_t k_from, std::int64_t k_to,
                                              std::int64_t k_step, const SimConfig& cfg) {
  if (k_step <= 0) throw std::invalid_argument("capacity_sweep: step must be > 0");
  if (k_from > k_to) throw std::invalid_argument("capacity_sweep: k_from must be <= k_to");
  std::vector<SweepPoint> points;
  for (std::int64_t k = k_from; k <= k_to; k += k_step) {
    SweepPoint p;
    p.k = k;
    p.outcomes = run_uniform_campaign(topo, k, cfg);
    p.summary = aggregate(p.outcomes, std::to_string(k));
    points.push_back(std::move(p));
  }
  return points;
}

struct AmountCampaign {
  Amount amount{0};
  std::vector<RunOutcome> outcomes;
};

/// One campaign per payment amount on the same graph and capacities, all
/// sharing the replica seeds of `cfg`.
inline std::vector<AmountCampaign> multi_amount_experiment(const ChannelGraph& g, std::span<const Amount> amounts, const SimConfig& cfg) {
  if (amounts.empty()) throw std::invalid_argument("multi_amount_experiment: no amounts");
  std::vector<AmountCampaign> out;
  for (Amount a : amounts) {
    SimConfig c = cfg;
    c.amount = a;
    out.push_back({a, monte_carlo(g, c)});
  }
  return out;
}

}  // namespace pcnsim
