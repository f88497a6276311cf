#pragma once

// Summary statistics, log-binned histograms and byte-stable file emission.
//
// Every emitted file starts with '#'-prefixed metadata lines (tool version,
// PRNG id, the resolved configuration) followed by a CSV header row, or is
// line-delimited JSON with the metadata in the first record.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcnsim/outcome.hpp"
#include "pcnsim/rng.hpp"

namespace pcnsim {

inline constexpr const char* kToolName = "pcnsim";
inline constexpr const char* kToolVersion = "0.1.0";

/// min/max/mean/std over the uncensored runs of one configuration point.
/// std is the population standard deviation.
struct Aggregate {
  std::string point;
  std::size_t runs{0};
  std::size_t count{0};  // uncensored runs
  std::size_t censored{0};
  double min{std::numeric_limits<double>::quiet_NaN()};
  double max{std::numeric_limits<double>::quiet_NaN()};
  double mean{std::numeric_limits<double>::quiet_NaN()};
  double std{std::numeric_limits<double>::quiet_NaN()};
};

/// Moments use exact 128-bit integer sums, so the result does not depend on
/// input order.
inline Aggregate aggregate(std::span<const RunOutcome> outcomes, std::string point = {}) {
  if (outcomes.empty()) throw std::invalid_argument("aggregate: empty outcome list");
  Aggregate a;
  a.point = std::move(point);
  a.runs = outcomes.size();
  u128 sum = 0, sum_sq = 0;
  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0;
  for (const auto& o : outcomes) {
    if (o.censored()) {
      ++a.censored;
      continue;
    }
    ++a.count;
    sum += o.tau;
    sum_sq += static_cast<u128>(o.tau) * o.tau;
    lo = std::min(lo, o.tau);
    hi = std::max(hi, o.tau);
  }
  if (a.count == 0) return a;
  const auto c = static_cast<u128>(a.count);
  a.min = static_cast<double>(lo);
  a.max = static_cast<double>(hi);
  a.mean = static_cast<double>(sum) / static_cast<double>(a.count);
  // n * sum_sq - sum^2 >= 0 exactly; may exceed 128 bits only for absurd inputs
  const long double num = static_cast<long double>(c * sum_sq - sum * sum);
  a.std = static_cast<double>(std::sqrt(num) / static_cast<long double>(a.count));
  return a;
}

/// Fraction of runs that failed within `horizon` rounds (censored runs count as survivors).
inline double failure_within(std::span<const RunOutcome> outcomes, std::uint64_t horizon) {
  if (outcomes.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t hit = 0;
  for (const auto& o : outcomes)
    if (!o.censored() && o.tau <= horizon) ++hit;
  return static_cast<double>(hit) / static_cast<double>(outcomes.size());
}

// ---------------------------------------------------------------------------
// Log histogram

struct LogHistogram {
  int bins_per_decade{1};
  int first_bin{0};  // bin i covers [10^((first_bin+i)/b), 10^((first_bin+i+1)/b))
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow{0};
  std::uint64_t overflow{0};
  std::vector<std::string> warnings;

  double lower_edge(std::size_t i) const {
    return std::pow(10.0, static_cast<double>(first_bin + static_cast<int>(i)) / bins_per_decade);
  }
  double upper_edge(std::size_t i) const { return lower_edge(i + 1); }
  std::uint64_t total() const {
    std::uint64_t t = underflow + overflow;
    for (auto c : counts) t += c;
    return t;
  }
};

namespace detail {

inline int log_bin(double v, int b) {
  int idx = static_cast<int>(std::floor(std::log10(v) * b));
  while (std::pow(10.0, static_cast<double>(idx + 1) / b) <= v) ++idx;
  while (std::pow(10.0, static_cast<double>(idx) / b) > v) --idx;
  return idx;
}

}  // namespace detail

/// Base-10 log-binned histogram. Without an explicit [lo_exp, hi_exp) decade
/// range the bins span the data; nonpositive values go to underflow.
inline LogHistogram log_histogram(std::span<const double> values, int bins_per_decade,
                                  std::optional<std::pair<int, int>> decades = std::nullopt) {
  if (bins_per_decade < 1) throw std::invalid_argument("log_histogram: bins_per_decade must be >= 1");
  LogHistogram h;
  h.bins_per_decade = bins_per_decade;
  int lo = 0, hi = 0;  // bin index range [lo, hi)
  if (decades) {
    if (decades->second <= decades->first) throw std::invalid_argument("log_histogram: empty decade range");
    lo = decades->first * bins_per_decade;
    hi = decades->second * bins_per_decade;
  } else {
    bool any = false;
    for (double v : values) {
      if (!(v > 0)) continue;
      int idx = detail::log_bin(v, bins_per_decade);
      lo = any ? std::min(lo, idx) : idx;
      hi = any ? std::max(hi, idx + 1) : idx + 1;
      any = true;
    }
  }
  h.first_bin = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo), 0);
  std::size_t nonpositive = 0;
  for (double v : values) {
    if (!(v > 0)) {
      ++nonpositive;
      ++h.underflow;
      continue;
    }
    int idx = detail::log_bin(v, bins_per_decade);
    if (idx < lo) ++h.underflow;
    else if (idx >= hi) ++h.overflow;
    else ++h.counts[static_cast<std::size_t>(idx - lo)];
  }
  if (nonpositive > 0) h.warnings.push_back(std::to_string(nonpositive) + " nonpositive value(s) counted as underflow");
  return h;
}

inline LogHistogram log_histogram(std::span<const RunOutcome> outcomes, int bins_per_decade,
                                  std::optional<std::pair<int, int>> decades = std::nullopt) {
  std::vector<double> taus;
  for (const auto& o : outcomes)
    if (!o.censored()) taus.push_back(static_cast<double>(o.tau));
  return log_histogram(std::span<const double>(taus), bins_per_decade, decades);
}

// ---------------------------------------------------------------------------
// Emission

/// Ordered key/value pairs written as the file's metadata header.
using Metadata = std::vector<std::pair<std::string, std::string>>;

inline Metadata base_metadata() {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"prng", kPrngId}, {"std", "population"}};
}

inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline void write_metadata(std::ostream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

enum class OutputFormat { csv, jsonl };

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "jsonl") return OutputFormat::jsonl;
  throw std::invalid_argument("unknown output format '" + s + "' (valid: csv, jsonl)");
}

namespace detail {

inline nlohmann::ordered_json metadata_json(const Metadata& meta) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : meta) j[k] = v;
  return nlohmann::ordered_json{{"metadata", j}};
}

}  // namespace detail

/// Raw per-run records: run,seed,tau,failure_kind,failing_edge.
inline void write_outcomes(std::ostream& os, const Metadata& meta, std::span<const RunOutcome> outcomes,
                           OutputFormat format = OutputFormat::csv) {
  if (format == OutputFormat::jsonl) {
    os << detail::metadata_json(meta).dump() << '\n';
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      nlohmann::ordered_json j{{"run", i}, {"seed", o.seed}, {"tau", o.tau}, {"failure_kind", to_string(o.kind)}};
      j["failing_edge"] = o.failing_edge ? nlohmann::ordered_json(*o.failing_edge) : nlohmann::ordered_json(nullptr);
      os << j.dump() << '\n';
    }
    return;
  }
  write_metadata(os, meta);
  os << "run,seed,tau,failure_kind,failing_edge\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    os << i << ',' << o.seed << ',' << o.tau << ',' << to_string(o.kind) << ',';
    if (o.failing_edge) os << *o.failing_edge;
    os << '\n';
  }
}

/// Parses the CSV written by write_outcomes (metadata lines skipped).
inline std::vector<RunOutcome> read_outcomes(std::istream& is) {
  std::vector<RunOutcome> out;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "run,seed,tau,failure_kind,failing_edge") throw std::invalid_argument("outcomes: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() == 4 && !line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 5) throw std::invalid_argument("outcomes: malformed row '" + line + "'");
    RunOutcome o;
    o.seed = std::stoull(cols[1]);
    o.tau = std::stoull(cols[2]);
    o.kind = parse_failure_kind(cols[3]);
    if (!cols[4].empty()) o.failing_edge = static_cast<EdgeId>(std::stoul(cols[4]));
    out.push_back(o);
  }
  return out;
}

/// One row per configuration point: <key>,min,mean,max,std,censored
/// (plus fail_prob_h when a horizon probability is supplied).
inline void write_aggregates(std::ostream& os, const Metadata& meta, std::span<const Aggregate> rows,
                             const std::string& key_column = "capacity",
                             std::span<const double> fail_prob_h = {}) {
  write_metadata(os, meta);
  os << key_column << ",min,mean,max,std,censored";
  if (!fail_prob_h.empty()) os << ",fail_prob_h";
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    os << a.point << ',' << format_real(a.min) << ',' << format_real(a.mean) << ',' << format_real(a.max) << ','
       << format_real(a.std) << ',' << a.censored;
    if (!fail_prob_h.empty()) os << ',' << format_real(fail_prob_h[i]);
    os << '\n';
  }
}

inline void write_histogram(std::ostream& os, Metadata meta, const LogHistogram& h) {
  meta.emplace_back("bins_per_decade", std::to_string(h.bins_per_decade));
  meta.emplace_back("underflow", std::to_string(h.underflow));
  meta.emplace_back("overflow", std::to_string(h.overflow));
  write_metadata(os, meta);
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << format_real(h.lower_edge(i)) << ',' << format_real(h.upper_edge(i)) << ',' << h.counts[i] << '\n';
}

/// Writes a file through `body`; I/O failures carry the path.
inline void emit_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  body(os);
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace pcnsim
