#pragma once

// Closed-form birth-and-death chain quantities, concentration bounds,
// failure-time bounds driven by xi = min_e k_e^2 / g(e), and least-squares
// scale fitting. Logarithms are natural throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcnsim/channel_graph.hpp"
#include "pcnsim/path_engine.hpp"
#include "pcnsim/rng.hpp"

namespace pcnsim {

/// E[hitting time of +-k | start j] = k^2 - j^2 for the unbiased chain.
inline std::int64_t expected_hitting_time(std::int64_t k, std::int64_t j) {
  if (k < 0 || j < -k || j > k) throw std::invalid_argument("expected_hitting_time: need |j| <= k");
  return k * k - j * j;
}

/// min(1, 4 exp(-k^2 / (6 t))): upper bound on P_0(tau <= t).
inline double hitting_tail_bound(std::int64_t k, std::int64_t t) {
  if (k < 1 || t < 1) throw std::invalid_argument("hitting_tail_bound: need k >= 1 and t >= 1");
  const auto kk = static_cast<double>(k);
  return std::min(1.0, 4.0 * std::exp(-kk * kk / (6.0 * static_cast<double>(t))));
}

/// Monte Carlo estimates for the reflection sandwich
///   P(|X_t| >= k) <= P(max_{i<=t} |X_i| >= k) <= 2 P(|X_t| >= k)
/// of the unbiased walk on Z started at 0.
struct ReflectionEstimate {
  double lo{0};        // P(|X_t| >= k)
  double observed{0};  // P(max |X_i| >= k)
  double hi{0};        // 2 P(|X_t| >= k)
  std::size_t samples{0};

  /// Ordering check allowing `z` standard errors of sampling noise on the upper side.
  /// The lower inequality holds pathwise, so it is checked exactly.
  bool ordering_holds(double z = 3.0) const {
    if (lo > observed) return false;
    const double n = static_cast<double>(samples);
    const double se = std::sqrt(observed * (1 - observed) / n) + 2.0 * std::sqrt(lo * (1 - lo) / n);
    return observed <= hi + z * se + 1e-12;
  }
};

inline ReflectionEstimate reflection_sandwich(std::int64_t k, std::int64_t t, std::size_t samples, Rng& rng) {
  if (t < 1) throw std::invalid_argument("reflection_sandwich: t must be >= 1");
  if (samples < 1) throw std::invalid_argument("reflection_sandwich: samples must be >= 1");
  std::size_t end_hits = 0, max_hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::int64_t x = 0;
    bool reached = false;
    for (std::int64_t i = 0; i < t; ++i) {
      x += rng.coin() ? 1 : -1;
      if (x >= k || x <= -k) reached = true;
    }
    if (reached) ++max_hits;
    if (x >= k || x <= -k) ++end_hits;
  }
  ReflectionEstimate r;
  r.samples = samples;
  r.lo = static_cast<double>(end_hits) / static_cast<double>(samples);
  r.observed = static_cast<double>(max_hits) / static_cast<double>(samples);
  r.hi = 2.0 * r.lo;
  return r;
}

namespace detail {
inline void check_chernoff(double mu, double delta) {
  if (!(mu > 0)) throw std::invalid_argument("chernoff: mu must be > 0");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("chernoff: delta must lie in (0, 1)");
}
}  // namespace detail

/// P(X <= (1 - delta) mu) <= exp(-delta^2 mu / 2)
inline double chernoff_lower(double mu, double delta) {
  detail::check_chernoff(mu, delta);
  return std::exp(-delta * delta * mu / 2.0);
}

/// P(X >= (1 + delta) mu) <= exp(-delta^2 mu / 3)
inline double chernoff_upper(double mu, double delta) {
  detail::check_chernoff(mu, delta);
  return std::exp(-delta * delta * mu / 3.0);
}

/// Probability that a given ring edge lies on the drawn path, summed over
/// distances 1 .. ceil(n/2)-1: (ceil(n/2)-1) ceil(n/2) / (n (n-1)).
/// Exact for odd n. For even n it leaves out the antipodal pairs' share
/// 1 / (2 (n-1)); ring_edge_probability_exact adds it back.
inline double ring_edge_probability(std::size_t n) {
  if (n < 3) throw std::invalid_argument("ring_edge_probability: n must be >= 3");
  const auto h = static_cast<double>((n + 1) / 2);
  const auto nn = static_cast<double>(n);
  return (h - 1.0) * h / (nn * (nn - 1.0));
}

/// Inclusion probability of a ring edge counting every pair, i.e.
/// 2 g(e) / (n (n-1)).
inline double ring_edge_probability_exact(std::size_t n) {
  const double p = ring_edge_probability(n);
  return n % 2 == 0 ? p + 1.0 / (2.0 * (static_cast<double>(n) - 1.0)) : p;
}

// ---------------------------------------------------------------------------
// Failure-time bounds

/// Clique with uniform per-side balance k. "order" values use unit
/// constants; "proof" values are the explicit round counts of the
/// high-probability argument (m k^2 / (27 ln n) and 4 m k^2).
struct CliqueBounds {
  double lower_order{0};  // k^2 n^2 / ln n
  double upper_order{0};  // k^2 n^2
  double lower_proof{0};  // m k^2 / (27 ln n)
  double upper_proof{0};  // 4 m k^2
  bool capacity_floor_ok{true};  // k > sqrt(4 alpha ln n)
};

inline CliqueBounds clique_bounds(std::size_t n, std::int64_t k, double alpha = 2.0) {
  if (n < 2 || k < 1) throw std::invalid_argument("clique_bounds: need n >= 2 and k >= 1");
  const auto nn = static_cast<double>(n);
  const double m = nn * (nn - 1.0) / 2.0;
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  const double ln_n = std::log(nn);
  CliqueBounds b;
  b.lower_order = kk * nn * nn / ln_n;
  b.upper_order = kk * nn * nn;
  b.lower_proof = m * kk / (27.0 * ln_n);
  b.upper_proof = 4.0 * m * kk;
  b.capacity_floor_ok = static_cast<double>(k) > std::sqrt(4.0 * alpha * ln_n);
  return b;
}

struct BoundReport {
  double xi{std::numeric_limits<double>::infinity()};
  double lower_bound_value{0};  // xi n^2 / ln n
  double upper_bound_value{0};  // xi n^2 ln n
  double lower_proof_value{0};  // n (n-1) xi / (54 ln n)
  double upper_proof_value{0};  // 4 n (n-1) xi ln n
  std::vector<double> per_side;  // k_e = c(e) / 2
  std::vector<double> betweenness;
  std::vector<double> per_edge_ratios;  // k_e^2 / g(e); +inf when g(e) = 0
  std::optional<EdgeId> argmin_edge;
  double alpha{2.0};
  std::vector<std::string> warnings;
};

/// xi = min_e k_e^2 / g(e) with k_e = c(e)/2, and the bounds it drives.
/// Edges with g(e) = 0 are excluded from xi. Edges failing
/// k_e > alpha sqrt(ln n) only produce a warning.
inline BoundReport xi_and_bounds(const ChannelGraph& g, const BetweennessMap& bmap, double alpha = 2.0) {
  if (bmap.size() != g.edge_count()) throw std::invalid_argument("xi_and_bounds: betweenness map does not match graph");
  BoundReport r;
  r.alpha = alpha;
  const std::size_t m = g.edge_count();
  const auto n = static_cast<double>(g.node_count());
  const double ln_n = std::log(n);
  const double floor_k = alpha * std::sqrt(ln_n);
  r.per_side.resize(m);
  r.betweenness = bmap.value;
  r.per_edge_ratios.resize(m);
  std::size_t zero_g = 0, below_floor = 0;
  for (EdgeId e = 0; e < m; ++e) {
    const double k = static_cast<double>(g.capacity(e)) / 2.0;
    r.per_side[e] = k;
    if (k < 1.0) throw std::invalid_argument("xi_and_bounds: edge " + std::to_string(e) + " has per-side balance < 1");
    if (!(k > floor_k)) ++below_floor;
    const double ge = bmap.value[e];
    if (ge <= 0.0) {
      ++zero_g;
      r.per_edge_ratios[e] = std::numeric_limits<double>::infinity();
      continue;
    }
    r.per_edge_ratios[e] = k * k / ge;
    if (!r.argmin_edge || r.per_edge_ratios[e] < r.xi) {
      r.xi = r.per_edge_ratios[e];
      r.argmin_edge = e;
    }
  }
  if (zero_g > 0) r.warnings.push_back(std::to_string(zero_g) + " edge(s) with zero betweenness excluded from xi");
  if (below_floor > 0)
    r.warnings.push_back(std::to_string(below_floor) + " edge(s) with k_e <= alpha*sqrt(ln n) = " + std::to_string(floor_k) +
                         " (alpha=" + std::to_string(alpha) + "); bounds may not apply");
  if (r.argmin_edge && n >= 2) {
    r.lower_bound_value = r.xi * n * n / ln_n;
    r.upper_bound_value = r.xi * n * n * ln_n;
    r.lower_proof_value = n * (n - 1.0) * r.xi / (54.0 * ln_n);
    r.upper_proof_value = 4.0 * n * (n - 1.0) * r.xi * ln_n;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Least-squares scale fit

enum class FitModel { upper, lower };

inline FitModel parse_fit_model(const std::string& s) {
  if (s == "upper") return FitModel::upper;
  if (s == "lower") return FitModel::lower;
  throw std::invalid_argument("unknown fit model '" + s + "' (valid: upper, lower)");
}

struct FitPoint {
  double n{0};
  double mean_tau{0};
};

/// f(n) = k^2 n^2 (upper) or k^2 n^2 / ln n (lower).
inline double fit_basis(FitModel model, double n, double k) {
  const double base = k * k * n * n;
  return model == FitModel::upper ? base : base / std::log(n);
}

inline double fit_residual(std::span<const FitPoint> points, FitModel model, double k, double p) {
  double r = 0.0;
  for (const auto& pt : points) {
    const double d = pt.mean_tau - p * fit_basis(model, pt.n, k);
    r += d * d;
  }
  return r;
}

/// argmin_p sum (y_i - p f(n_i))^2 = sum f_i y_i / sum f_i^2.
inline double fit_scale(std::span<const FitPoint> points, FitModel model, double k) {
  if (points.empty()) throw std::invalid_argument("fit_scale: no points");
  double fy = 0.0, ff = 0.0;
  for (const auto& pt : points) {
    if (model == FitModel::lower && !(pt.n > 1.0)) throw std::invalid_argument("fit_scale: lower model needs n > 1");
    const double f = fit_basis(model, pt.n, k);
    fy += f * pt.mean_tau;
    ff += f * f;
  }
  if (ff == 0.0) throw std::invalid_argument("fit_scale: basis is zero at every point");
  return fy / ff;
}

}  // namespace pcnsim
