#pragma once

// Total-preserving capacity redistribution over a fixed topology.
//
// uniform:       every edge gets total/m, remainder handed out one unit at a
//                time in ascending edge-id order.
// xi_optimized:  per-side k_e proportional to sqrt(g(e)), so k_e^2 / g(e) is
//                the same on every edge; integerized by largest remainder.
// Every new capacity is >= 2 so no edge starts depleted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcnsim/channel_graph.hpp"
#include "pcnsim/path_engine.hpp"
#include "pcnsim/results_io.hpp"

namespace pcnsim {

inline constexpr Amount kMinPlanCapacity = 2;

enum class PlanStrategy { original, uniform, xi_optimized };

inline std::string_view to_string(PlanStrategy s) noexcept {
  switch (s) {
    case PlanStrategy::original: return "original";
    case PlanStrategy::uniform: return "uniform";
    case PlanStrategy::xi_optimized: return "xi_optimized";
  }
  return "?";
}

inline PlanStrategy parse_plan_strategy(const std::string& s) {
  if (s == "original") return PlanStrategy::original;
  if (s == "uniform") return PlanStrategy::uniform;
  if (s == "xi_optimized" || s == "optimized" || s == "xi") return PlanStrategy::xi_optimized;
  throw std::invalid_argument("unknown strategy '" + s + "' (valid: original, uniform, xi_optimized)");
}

struct CapacityPlan {
  PlanStrategy strategy{PlanStrategy::original};
  std::vector<Amount> capacity;  // by edge id
  std::vector<double> target;    // real-valued capacity before rounding
  std::vector<bool> at_floor;    // pinned to kMinPlanCapacity
  Amount total_before{0};
  Amount total_after{0};

  bool conserved() const noexcept { return total_before == total_after; }
};

namespace detail {

inline void require_total(const ChannelGraph& g) {
  const Amount total = g.total_capacity();
  if (total < kMinPlanCapacity * static_cast<Amount>(g.edge_count()))
    throw std::invalid_argument("redistribution: total capacity " + std::to_string(total) + " < 2m = " +
                                std::to_string(kMinPlanCapacity * static_cast<Amount>(g.edge_count())));
}

inline Amount sum(const std::vector<Amount>& v) { return std::accumulate(v.begin(), v.end(), Amount{0}); }

/// Rounds `target` (indices in `ids`) to integers summing to `budget`:
/// floor everything, then move the leftover units one at a time to the
/// largest fractional parts, ties by ascending id.
inline void largest_remainder(const std::vector<long double>& target, const std::vector<EdgeId>& ids, Amount budget,
                              std::vector<Amount>& out) {
  Amount assigned = 0;
  for (EdgeId e : ids) {
    out[e] = static_cast<Amount>(std::floor(target[e]));
    assigned += out[e];
  }
  std::vector<EdgeId> order(ids);
  auto frac = [&](EdgeId e) { return target[e] - std::floor(target[e]); };
  Amount leftover = budget - assigned;
  if (leftover >= 0) {
    std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return frac(a) > frac(b); });
    for (std::size_t i = 0; leftover > 0; i = (i + 1) % order.size(), --leftover) ++out[order[i]];
  } else {
    // floating error pushed floors past the budget; take back from the smallest fractions
    std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return frac(a) < frac(b); });
    for (std::size_t i = 0; leftover < 0; i = (i + 1) % order.size()) {
      if (out[order[i]] > kMinPlanCapacity) {
        --out[order[i]];
        ++leftover;
      }
    }
  }
}

}  // namespace detail

inline CapacityPlan original_plan(const ChannelGraph& g) {
  CapacityPlan p;
  p.strategy = PlanStrategy::original;
  for (const auto& c : g.edges()) {
    p.capacity.push_back(c.capacity);
    p.target.push_back(static_cast<double>(c.capacity));
  }
  p.at_floor.assign(g.edge_count(), false);
  p.total_before = p.total_after = g.total_capacity();
  return p;
}

inline CapacityPlan redistribute_uniform(const ChannelGraph& g) {
  if (g.edge_count() == 0) throw std::invalid_argument("redistribute_uniform: graph has no edges");
  detail::require_total(g);
  const Amount total = g.total_capacity();
  const auto m = static_cast<Amount>(g.edge_count());
  CapacityPlan p;
  p.strategy = PlanStrategy::uniform;
  p.total_before = total;
  p.capacity.assign(g.edge_count(), total / m);
  for (Amount e = 0; e < total % m; ++e) ++p.capacity[static_cast<std::size_t>(e)];
  p.target.assign(g.edge_count(), static_cast<double>(total) / static_cast<double>(m));
  p.at_floor.assign(g.edge_count(), false);
  p.total_after = detail::sum(p.capacity);
  return p;
}

/// Real targets c_e = 2 lambda sqrt(g(e)) with sum c_e = total. Edges with
/// g(e) = 0, and any whose target would fall below 2, are pinned at 2 and
/// lambda is re-solved on the rest.
inline CapacityPlan redistribute_xi_optimized(const ChannelGraph& g, const BetweennessMap& bmap) {
  if (g.edge_count() == 0) throw std::invalid_argument("redistribute_xi_optimized: graph has no edges");
  if (bmap.size() != g.edge_count()) throw std::invalid_argument("redistribute_xi_optimized: betweenness map does not match graph");
  detail::require_total(g);
  const std::size_t m = g.edge_count();
  const Amount total = g.total_capacity();
  CapacityPlan p;
  p.strategy = PlanStrategy::xi_optimized;
  p.total_before = total;
  p.capacity.assign(m, kMinPlanCapacity);
  p.at_floor.assign(m, false);
  std::vector<long double> target(m, static_cast<long double>(kMinPlanCapacity));
  std::vector<EdgeId> active;
  for (EdgeId e = 0; e < m; ++e) {
    if (bmap.value[e] > 0.0) active.push_back(e);
    else p.at_floor[e] = true;
  }
  Amount budget = total - kMinPlanCapacity * static_cast<Amount>(m - active.size());
  for (;;) {
    if (active.empty()) break;
    long double root_sum = 0;
    for (EdgeId e : active) root_sum += std::sqrt(static_cast<long double>(bmap.value[e]));
    bool pinned = false;
    for (EdgeId e : active) {
      target[e] = static_cast<long double>(budget) * std::sqrt(static_cast<long double>(bmap.value[e])) / root_sum;
      if (target[e] < kMinPlanCapacity) pinned = true;
    }
    if (!pinned) break;
    std::vector<EdgeId> keep;
    for (EdgeId e : active) {
      if (target[e] < kMinPlanCapacity) {
        p.at_floor[e] = true;
        target[e] = kMinPlanCapacity;
        budget -= kMinPlanCapacity;
      } else {
        keep.push_back(e);
      }
    }
    active = std::move(keep);
  }
  if (active.empty()) {
    // all edges pinned: any surplus goes to edge 0 onwards one unit at a time
    Amount leftover = total - kMinPlanCapacity * static_cast<Amount>(m);
    for (std::size_t e = 0; leftover > 0; e = (e + 1) % m, --leftover) ++p.capacity[e];
  } else {
    detail::largest_remainder(target, active, budget, p.capacity);
  }
  p.target.assign(target.begin(), target.end());
  p.total_after = detail::sum(p.capacity);
  return p;
}

inline CapacityPlan make_plan(const ChannelGraph& g, PlanStrategy s, const BetweennessMap* bmap = nullptr) {
  switch (s) {
    case PlanStrategy::original: return original_plan(g);
    case PlanStrategy::uniform: return redistribute_uniform(g);
    case PlanStrategy::xi_optimized:
      if (!bmap) throw std::invalid_argument("xi_optimized plan needs betweenness");
      return redistribute_xi_optimized(g, *bmap);
  }
  throw std::logic_error("unreachable");
}

/// edge_id,old_capacity,new_capacity,betweenness,new_ratio
/// new_ratio = (new_capacity/2)^2 / g(e), i.e. per-side balance convention.
inline void write_plan(std::ostream& os, Metadata meta, const ChannelGraph& g, const CapacityPlan& plan,
                       const BetweennessMap& bmap) {
  meta.emplace_back("strategy", std::string(to_string(plan.strategy)));
  meta.emplace_back("total_before", std::to_string(plan.total_before));
  meta.emplace_back("total_after", std::to_string(plan.total_after));
  meta.emplace_back("conserved", plan.conserved() ? "true" : "false");
  meta.emplace_back("ratio_convention", "per_side");
  write_metadata(os, meta);
  os << "edge_id,old_capacity,new_capacity,betweenness,new_ratio\n";
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const double k = static_cast<double>(plan.capacity[e]) / 2.0;
    const double ge = bmap.value[e];
    const double ratio = ge > 0 ? k * k / ge : std::numeric_limits<double>::infinity();
    os << e << ',' << g.capacity(e) << ',' << plan.capacity[e] << ',' << format_real(ge) << ',' << format_real(ratio) << '\n';
  }
}

/// New capacities from a plan CSV, indexed by edge id.
inline std::vector<Amount> read_plan_capacities(std::istream& is) {
  std::vector<std::pair<EdgeId, Amount>> rows;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("edge_id,old_capacity,new_capacity", 0) != 0) throw std::invalid_argument("plan: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string id, old_c, new_c;
    if (!std::getline(ss, id, ',') || !std::getline(ss, old_c, ',') || !std::getline(ss, new_c, ','))
      throw std::invalid_argument("plan: malformed row '" + line + "'");
    rows.emplace_back(static_cast<EdgeId>(std::stoul(id)), static_cast<Amount>(std::stoll(new_c)));
  }
  std::vector<Amount> caps(rows.size(), 0);
  for (auto [e, c] : rows) {
    if (e >= caps.size()) throw std::invalid_argument("plan: edge ids must be dense 0..m-1");
    caps[e] = c;
  }
  return caps;
}

}  // namespace pcnsim
