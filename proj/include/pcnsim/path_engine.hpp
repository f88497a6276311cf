#pragma once

// Hop-count shortest-path machinery: single-source DAGs with path counts,
// exactly uniform shortest-path sampling, and edge-betweenness centrality
// (dependency accumulation over every source, unordered pairs counted once).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <list>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pcnsim/channel_graph.hpp"
#include "pcnsim/rng.hpp"

namespace pcnsim {

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

/// BFS shortest-path DAG rooted at `source`.
///
/// `sigma` holds exact 128-bit path counts while they fit; on overflow
/// `exact` drops to false and callers must use `sigma_real`, which is always
/// populated.
struct ShortestPathDag {
  NodeId source{0};
  std::vector<std::uint32_t> dist;
  std::vector<u128> sigma;
  std::vector<double> sigma_real;
  bool exact{true};
  std::vector<NodeId> order;  // reachable nodes in non-decreasing distance
  std::vector<std::size_t> pred_offsets;
  std::vector<Incidence> preds;  // (predecessor, edge into the node)

  std::span<const Incidence> predecessors(NodeId w) const noexcept {
    return {preds.data() + pred_offsets[w], pred_offsets[w + 1] - pred_offsets[w]};
  }
  bool reachable(NodeId w) const noexcept { return dist[w] != kUnreachable; }

  std::size_t memory_bytes() const noexcept {
    return dist.size() * (sizeof(std::uint32_t) + sizeof(u128) + sizeof(double) + sizeof(NodeId) + sizeof(std::size_t)) +
           preds.size() * sizeof(Incidence);
  }
};

inline ShortestPathDag sssp_dag(const ChannelGraph& g, NodeId source) {
  const std::size_t n = g.node_count();
  if (source >= n) throw std::invalid_argument("sssp_dag: source out of range");
  ShortestPathDag dag;
  dag.source = source;
  dag.dist.assign(n, kUnreachable);
  dag.sigma.assign(n, 0);
  dag.sigma_real.assign(n, 0.0);
  dag.order.reserve(n);
  dag.dist[source] = 0;
  dag.order.push_back(source);
  for (std::size_t head = 0; head < dag.order.size(); ++head) {
    const NodeId x = dag.order[head];
    for (auto inc : g.neighbors(x)) {
      if (dag.dist[inc.neighbor] == kUnreachable) {
        dag.dist[inc.neighbor] = dag.dist[x] + 1;
        dag.order.push_back(inc.neighbor);
      }
    }
  }
  // Predecessor lists in CSR form, filled in BFS order so every
  // predecessor's sigma is final before it is summed.
  std::vector<std::size_t> count(n, 0);
  for (NodeId w : dag.order) {
    if (w == source) continue;
    for (auto inc : g.neighbors(w))
      if (dag.dist[inc.neighbor] + 1 == dag.dist[w]) ++count[w];
  }
  dag.pred_offsets.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) dag.pred_offsets[x + 1] = dag.pred_offsets[x] + count[x];
  dag.preds.resize(dag.pred_offsets[n]);
  dag.sigma[source] = 1;
  dag.sigma_real[source] = 1.0;
  for (NodeId w : dag.order) {
    if (w == source) continue;
    std::size_t slot = dag.pred_offsets[w];
    u128 s = 0;
    double sr = 0.0;
    for (auto inc : g.neighbors(w)) {
      const NodeId p = inc.neighbor;
      if (dag.dist[p] + 1 != dag.dist[w]) continue;
      dag.preds[slot++] = {p, inc.edge};
      sr += dag.sigma_real[p];
      if (dag.exact && __builtin_add_overflow(s, dag.sigma[p], &s)) dag.exact = false;
    }
    dag.sigma[w] = dag.exact ? s : 0;
    dag.sigma_real[w] = sr;
  }
  return dag;
}

/// One step of a payment path: the edge and the endpoint the payment leaves from.
struct Hop {
  NodeId from;
  EdgeId edge;
};

/// Uniform shortest path from dag.source to `target`, as hops in travel
/// order. Backward walk choosing predecessor p with probability
/// sigma(p)/sigma(w); the product telescopes to 1/sigma(target).
inline void sample_shortest_hops(const ShortestPathDag& dag, NodeId target, Rng& rng, std::vector<Hop>& hops) {
  if (target >= dag.dist.size() || !dag.reachable(target)) throw std::invalid_argument("sample_shortest_path: target unreachable");
  hops.resize(dag.dist[target]);
  NodeId w = target;
  for (std::size_t i = hops.size(); i-- > 0;) {
    auto ps = dag.predecessors(w);
    const Incidence* chosen = &ps.back();
    if (ps.size() > 1) {
      if (dag.exact) {
        u128 r = rng.below128(dag.sigma[w]);
        for (const auto& p : ps) {
          if (r < dag.sigma[p.neighbor]) {
            chosen = &p;
            break;
          }
          r -= dag.sigma[p.neighbor];
        }
      } else {
        double r = rng.uniform() * dag.sigma_real[w];
        for (const auto& p : ps) {
          if (r < dag.sigma_real[p.neighbor]) {
            chosen = &p;
            break;
          }
          r -= dag.sigma_real[p.neighbor];
        }
      }
    }
    hops[i] = {chosen->neighbor, chosen->edge};
    w = chosen->neighbor;
  }
}

/// Node sequence (source, ..., target) of a uniformly drawn shortest path.
inline std::vector<NodeId> sample_shortest_path(const ShortestPathDag& dag, NodeId target, Rng& rng) {
  if (target == dag.source) throw std::invalid_argument("sample_shortest_path: target equals source");
  std::vector<Hop> hops;
  sample_shortest_hops(dag, target, rng, hops);
  std::vector<NodeId> path;
  path.reserve(hops.size() + 1);
  for (const auto& h : hops) path.push_back(h.from);
  path.push_back(target);
  return path;
}

/// Bounded least-recently-used cache of shortest-path DAGs keyed by source.
/// Caching never changes which path is drawn for a given random stream.
class PathSampler {
 public:
  explicit PathSampler(const ChannelGraph& g, std::size_t cache_bytes = std::size_t{256} << 20)
      : g_(&g), budget_(cache_bytes), slots_(g.node_count()) {}

  const ChannelGraph& graph() const noexcept { return *g_; }

  const ShortestPathDag& dag(NodeId source) {
    auto& slot = slots_[source];
    if (slot.dag) {
      lru_.splice(lru_.begin(), lru_, slot.pos);
      return *slot.dag;
    }
    auto built = std::make_unique<ShortestPathDag>(sssp_dag(*g_, source));
    const std::size_t bytes = built->memory_bytes();
    if (!built->exact) overflowed_ = true;
    while (!lru_.empty() && used_ + bytes > budget_) evict();
    if (bytes > budget_) {
      scratch_ = std::move(built);
      return *scratch_;
    }
    used_ += bytes;
    lru_.push_front(source);
    slot.dag = std::move(built);
    slot.pos = lru_.begin();
    return *slot.dag;
  }

  /// Uniform shortest (u, v)-path. Adjacent endpoints short-circuit to the
  /// connecting edge, the unique shortest path in a simple graph.
  void sample(NodeId u, NodeId v, Rng& rng, std::vector<Hop>& hops) {
    if (auto e = g_->find_edge(u, v)) {
      hops.assign(1, Hop{u, *e});
      return;
    }
    sample_shortest_hops(dag(u), v, rng, hops);
  }

  /// True once any DAG needed floating-point path counts.
  bool path_count_overflowed() const noexcept { return overflowed_; }

 private:
  struct Slot {
    std::unique_ptr<ShortestPathDag> dag;
    std::list<NodeId>::iterator pos;
  };

  void evict() {
    const NodeId victim = lru_.back();
    lru_.pop_back();
    used_ -= slots_[victim].dag->memory_bytes();
    slots_[victim].dag.reset();
  }

  const ChannelGraph* g_;
  std::size_t budget_;
  std::size_t used_{0};
  std::vector<Slot> slots_;
  std::list<NodeId> lru_;
  std::unique_ptr<ShortestPathDag> scratch_;
  bool overflowed_{false};
};

// ---------------------------------------------------------------------------
// Edge betweenness

struct BetweennessMap {
  std::vector<double> value;  // g(e) by edge id
  double operator[](EdgeId e) const { return value[e]; }
  std::size_t size() const noexcept { return value.size(); }
};

namespace detail {

// Adds the dependency contributions of every ordered pair (source, t).
inline void accumulate_source(const ChannelGraph& g, NodeId source, std::vector<double>& acc, std::vector<double>& delta) {
  const auto dag = sssp_dag(g, source);
  std::fill(delta.begin(), delta.end(), 0.0);
  for (std::size_t i = dag.order.size(); i-- > 1;) {
    const NodeId w = dag.order[i];
    const double coeff = (1.0 + delta[w]) / dag.sigma_real[w];
    for (const auto& p : dag.predecessors(w)) {
      const double c = dag.sigma_real[p.neighbor] * coeff;
      acc[p.edge] += c;
      delta[p.neighbor] += c;
    }
  }
}

}  // namespace detail

/// Exact edge betweenness over unordered distinct pairs. Sources are
/// processed in fixed blocks and reduced in block order, so the result is
/// bit-identical for any worker count.
inline BetweennessMap edge_betweenness(const ChannelGraph& g, unsigned workers = 1) {
  const std::size_t n = g.node_count();
  const std::size_t m = g.edge_count();
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(blocks);
  auto run_block = [&](std::size_t b) {
    std::vector<double> acc(m, 0.0), delta(n, 0.0);
    for (std::size_t s = b * kBlock; s < std::min(n, (b + 1) * kBlock); ++s)
      detail::accumulate_source(g, static_cast<NodeId>(s), acc, delta);
    partial[b] = std::move(acc);
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(blocks, 1)));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }
  BetweennessMap out{std::vector<double>(m, 0.0)};
  for (const auto& acc : partial)
    for (std::size_t e = 0; e < m; ++e) out.value[e] += acc[e];
  for (auto& v : out.value) v *= 0.5;  // each unordered pair was seen from both ends
  return out;
}

/// Probability that edge e lies on the path drawn in one round:
/// 2 g(e) / (n (n - 1)).
inline double edge_selection_probability(const ChannelGraph& g, const BetweennessMap& bmap, EdgeId e) {
  const auto n = static_cast<double>(g.node_count());
  return 2.0 * bmap.value.at(e) / (n * (n - 1.0));
}

}  // namespace pcnsim
