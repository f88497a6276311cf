#pragma once

// Channel graph data model: an immutable simple undirected graph with
// per-edge capacities, per-run balance state, synthetic generators and the
// plain edge-list text format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcnsim/rng.hpp"

namespace pcnsim {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Amount = std::int64_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Channel {
  NodeId u{0};
  NodeId v{0};
  Amount capacity{0};
};

struct Incidence {
  NodeId neighbor;
  EdgeId edge;
};

class ChannelGraph {
 public:
  ChannelGraph() = default;

  /// Builds the graph from an edge list. Endpoints are normalized so u < v;
  /// edge ids follow input order. Rejects self-loops, parallel edges,
  /// out-of-range endpoints and non-positive capacities.
  ChannelGraph(std::size_t node_count, std::vector<Channel> channels)
      : n_(node_count), edges_(std::move(channels)) {
    if (n_ > static_cast<std::size_t>(kNoNode)) throw std::invalid_argument("graph: too many nodes");
    for (auto& c : edges_) {
      if (c.u >= n_ || c.v >= n_) throw std::invalid_argument("graph: edge endpoint out of range");
      if (c.u == c.v) throw std::invalid_argument("graph: self-loop on node " + std::to_string(c.u));
      if (c.capacity < 1) throw std::invalid_argument("graph: capacity must be >= 1");
      if (c.u > c.v) std::swap(c.u, c.v);
    }
    offsets_.assign(n_ + 1, 0);
    for (const auto& c : edges_) {
      ++offsets_[c.u + 1];
      ++offsets_[c.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    incidence_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      incidence_[fill[edges_[e].u]++] = {edges_[e].v, e};
      incidence_[fill[edges_[e].v]++] = {edges_[e].u, e};
    }
    for (std::size_t x = 0; x < n_; ++x) {
      auto first = incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[x]);
      auto last = incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[x + 1]);
      std::sort(first, last, [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
      if (std::adjacent_find(first, last, [](const Incidence& a, const Incidence& b) {
            return a.neighbor == b.neighbor;
          }) != last) {
        throw std::invalid_argument("graph: parallel edge at node " + std::to_string(x));
      }
    }
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::vector<Channel>& edges() const noexcept { return edges_; }
  const Channel& edge(EdgeId e) const { return edges_.at(e); }
  Amount capacity(EdgeId e) const { return edges_[e].capacity; }

  std::span<const Incidence> neighbors(NodeId x) const noexcept {
    return {incidence_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  std::size_t degree(NodeId x) const noexcept { return offsets_[x + 1] - offsets_[x]; }

  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const noexcept {
    if (a >= n_ || b >= n_) return std::nullopt;
    if (degree(a) > degree(b)) std::swap(a, b);
    auto adj = neighbors(a);
    auto it = std::lower_bound(adj.begin(), adj.end(), b,
                               [](const Incidence& inc, NodeId key) { return inc.neighbor < key; });
    if (it != adj.end() && it->neighbor == b) return it->edge;
    return std::nullopt;
  }

  Amount total_capacity() const noexcept {
    Amount total = 0;
    for (const auto& c : edges_) total += c.capacity;
    return total;
  }

  /// Same topology, new per-edge capacities (indexed by edge id).
  ChannelGraph with_capacities(std::span<const Amount> caps) const {
    if (caps.size() != edges_.size()) throw std::invalid_argument("graph: capacity vector size mismatch");
    auto copy = edges_;
    for (std::size_t e = 0; e < copy.size(); ++e) copy[e].capacity = caps[e];
    return ChannelGraph(n_, std::move(copy));
  }

  ChannelGraph with_uniform_capacity(Amount capacity) const {
    std::vector<Amount> caps(edges_.size(), capacity);
    return with_capacities(caps);
  }

  bool is_complete() const noexcept { return n_ >= 2 && edges_.size() == n_ * (n_ - 1) / 2; }

 private:
  std::size_t n_{0};
  std::vector<Channel> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> incidence_;
};

/// Directional balances of every channel. Per-run mutable state.
class BalanceState {
 public:
  BalanceState() = default;
  BalanceState(std::vector<Amount> at_u, std::vector<Amount> at_v) : at_u_(std::move(at_u)), at_v_(std::move(at_v)) {}

  std::size_t size() const noexcept { return at_u_.size(); }
  Amount at_u(EdgeId e) const { return at_u_[e]; }
  Amount at_v(EdgeId e) const { return at_v_[e]; }
  Amount min_side(EdgeId e) const { return std::min(at_u_[e], at_v_[e]); }

  /// Balance held by `from` on edge e (the side a payment leaving `from` draws on).
  Amount outgoing(const ChannelGraph& g, EdgeId e, NodeId from) const {
    return g.edge(e).u == from ? at_u_[e] : at_v_[e];
  }

  /// Moves `amount` across edge e away from endpoint `from`.
  void transfer(const ChannelGraph& g, EdgeId e, NodeId from, Amount amount) {
    if (g.edge(e).u == from) {
      at_u_[e] -= amount;
      at_v_[e] += amount;
    } else {
      at_v_[e] -= amount;
      at_u_[e] += amount;
    }
  }

 private:
  std::vector<Amount> at_u_;
  std::vector<Amount> at_v_;
};

/// Even capacity 2k splits (k, k); odd capacity gives the floor to the
/// smaller node id (always the u side).
inline BalanceState init_balances(const ChannelGraph& g) {
  std::vector<Amount> at_u(g.edge_count()), at_v(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Amount c = g.capacity(e);
    at_u[e] = c / 2;
    at_v[e] = c - c / 2;
  }
  return {std::move(at_u), std::move(at_v)};
}

// ---------------------------------------------------------------------------
// Generators

inline ChannelGraph make_clique(std::size_t n, Amount capacity) {
  if (n < 2) throw std::invalid_argument("make_clique: n must be >= 2");
  if (capacity < 2 || capacity % 2 != 0) throw std::invalid_argument("make_clique: capacity must be even and >= 2");
  std::vector<Channel> edges;
  edges.reserve(n * (n - 1) / 2);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v, capacity});
  return {n, std::move(edges)};
}

inline ChannelGraph make_ring(std::size_t n, Amount capacity) {
  if (n < 3) throw std::invalid_argument("make_ring: n must be >= 3");
  if (capacity < 1) throw std::invalid_argument("make_ring: capacity must be >= 1");
  std::vector<Channel> edges;
  edges.reserve(n);
  for (NodeId i = 0; i < n; ++i) edges.push_back({i, static_cast<NodeId>((i + 1) % n), capacity});
  return {n, std::move(edges)};
}

inline ChannelGraph make_path(std::size_t n, Amount capacity) {
  if (n < 2) throw std::invalid_argument("make_path: n must be >= 2");
  std::vector<Channel> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, capacity});
  return {n, std::move(edges)};
}

/// Watts-Strogatz ring lattice (each node linked to `half_degree` neighbours
/// per side) with each lattice edge rewired with probability `rewire`.
/// Rewiring never creates self-loops or parallel edges.
inline ChannelGraph make_small_world(std::size_t n, std::size_t half_degree, double rewire, Amount capacity, Rng& rng) {
  if (n < 3 || half_degree < 1 || 2 * half_degree >= n)
    throw std::invalid_argument("make_small_world: need n >= 3 and 1 <= half_degree < n/2");
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t d = 1; d <= half_degree; ++d) {
      auto j = static_cast<NodeId>((i + d) % n);
      pairs.emplace_back(i, j);
      adj[i][j] = adj[j][i] = true;
    }
  }
  for (auto& [a, b] : pairs) {
    if (rng.uniform() >= rewire) continue;
    if (adj[a].size() - 1 <= static_cast<std::size_t>(std::count(adj[a].begin(), adj[a].end(), true))) continue;
    NodeId c;
    do {
      c = static_cast<NodeId>(rng.below(n));
    } while (c == a || adj[a][c]);
    adj[a][b] = adj[b][a] = false;
    adj[a][c] = adj[c][a] = true;
    b = c;
  }
  std::vector<Channel> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) edges.push_back({a, b, capacity});
  return {n, std::move(edges)};
}

/// Capacities drawn log-uniformly from [lo, hi].
inline ChannelGraph with_log_uniform_capacities(const ChannelGraph& g, Amount lo, Amount hi, Rng& rng) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("log-uniform capacities: need 1 <= lo <= hi");
  std::vector<Amount> caps(g.edge_count());
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (auto& c : caps) {
    c = static_cast<Amount>(std::llround(std::exp(a + (b - a) * rng.uniform())));
    c = std::clamp(c, lo, hi);
  }
  return g.with_capacities(caps);
}

// ---------------------------------------------------------------------------
// Components

struct Subgraph {
  ChannelGraph graph;
  std::vector<NodeId> original_ids;  // dense id -> id in the parent graph
};

/// Connected-component label per node; labels ordered by smallest member id.
inline std::vector<NodeId> component_labels(const ChannelGraph& g, std::size_t* count = nullptr) {
  std::vector<NodeId> label(g.node_count(), kNoNode);
  std::vector<NodeId> stack;
  NodeId next = 0;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (label[s] != kNoNode) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      for (auto inc : g.neighbors(x)) {
        if (label[inc.neighbor] == kNoNode) {
          label[inc.neighbor] = next;
          stack.push_back(inc.neighbor);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

inline bool is_connected(const ChannelGraph& g) {
  std::size_t count = 0;
  component_labels(g, &count);
  return count <= 1;
}

inline Subgraph induced_subgraph(const ChannelGraph& g, const std::vector<bool>& keep) {
  std::vector<NodeId> remap(g.node_count(), kNoNode);
  Subgraph out;
  for (NodeId x = 0; x < g.node_count(); ++x) {
    if (keep[x]) {
      remap[x] = static_cast<NodeId>(out.original_ids.size());
      out.original_ids.push_back(x);
    }
  }
  std::vector<Channel> edges;
  for (const auto& c : g.edges()) {
    if (keep[c.u] && keep[c.v]) edges.push_back({remap[c.u], remap[c.v], c.capacity});
  }
  out.graph = ChannelGraph(out.original_ids.size(), std::move(edges));
  return out;
}

/// Largest connected component; ties go to the component holding the
/// smallest node id. Node order and edge order are preserved.
inline Subgraph giant_component(const ChannelGraph& g) {
  if (g.node_count() == 0) return {};
  std::size_t count = 0;
  auto label = component_labels(g, &count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto l : label) ++sizes[l];
  // labels are assigned in order of smallest member, so the first maximum wins ties
  const auto best = static_cast<NodeId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<bool> keep(g.node_count());
  for (NodeId x = 0; x < g.node_count(); ++x) keep[x] = label[x] == best;
  return induced_subgraph(g, keep);
}

// ---------------------------------------------------------------------------
// Edge-list text format: "n m" header, then one "u v capacity" line per edge.

inline void write_edge_list(std::ostream& os, const ChannelGraph& g) {
  os << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const auto& c : g.edges()) os << c.u << ' ' << c.v << ' ' << c.capacity << '\n';
}

inline ChannelGraph read_edge_list(std::istream& is) {
  std::size_t n = 0, m = 0;
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw std::invalid_argument("edge list: missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> n >> m)) throw std::invalid_argument("edge list: malformed header '" + line + "'");
  }
  std::vector<Channel> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!next_line()) throw std::invalid_argument("edge list: expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    std::istringstream ls(line);
    long long u = 0, v = 0, c = 0;
    if (!(ls >> u >> v >> c) || u < 0 || v < 0)
      throw std::invalid_argument("edge list: malformed edge line " + std::to_string(i + 2) + " '" + line + "'");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), static_cast<Amount>(c)});
  }
  return {n, std::move(edges)};
}

}  // namespace pcnsim
