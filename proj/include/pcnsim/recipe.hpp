#pragma once

// Declarative campaign configuration.
//
// A recipe is a flat key-value document ("key = value" per line, '#'
// comments). Resolution order, lowest to highest precedence:
//   built-in defaults < config file < command-line flags.
// PCN_SIM_SEED supplies the base seed only when neither file nor flags do.
// Every key is typed and validated up front; unknown keys are rejected.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcnsim/results_io.hpp"

namespace pcnsim {

/// Configuration problem; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { string, integer, real, boolean, path, integer_list };

struct KeySpec {
  std::string_view name;
  KeyType type;
  std::string_view default_value;  // empty: no default
  std::string_view help;
  bool echo{true};  // execution-only keys (worker count) stay out of result files
};

// clang-format off
inline const std::vector<KeySpec>& recipe_schema() {
  static const std::vector<KeySpec> schema = {
    {"topology",          KeyType::string,       "",          "clique | ring | independent | chains | smallworld (graph/snapshot inferred from input keys)"},
    {"nodes",             KeyType::integer,      "",          "node count n (chain count for 'chains')"},
    {"balance",           KeyType::integer,      "",          "per-side balance k of every edge"},
    {"capacity",          KeyType::integer,      "",          "edge capacity value; per-side k unless capacity_is_total"},
    {"capacity_is_total", KeyType::boolean,      "false",     "interpret capacity values as total c(e) = 2k"},
    {"graph",             KeyType::path,         "",          "edge-list input file"},
    {"snapshot",          KeyType::path,         "",          "LND describegraph JSON input (giant component is used)"},
    {"plan",              KeyType::path,         "",          "capacity plan CSV overriding input capacities"},
    {"strategy",          KeyType::string,       "original",  "original | uniform | xi_optimized"},
    {"amount",            KeyType::integer,      "1",         "payment amount x"},
    {"amounts",           KeyType::integer_list, "",          "comma-separated amounts (one campaign each)"},
    {"stop",              KeyType::string,       "",          "depletion | attempt (default: attempt for snapshot/graph files, else depletion)"},
    {"runs",              KeyType::integer,      "10",        "replicas per configuration point"},
    {"seed",              KeyType::integer,      "",          "base seed (fallback: PCN_SIM_SEED, then 1)"},
    {"max_steps",         KeyType::integer,      "1000000000000", "per-run round cap"},
    {"workers",           KeyType::integer,      "0",         "parallel replicas (0 = all cores, 1 = sequential)", false},
    {"format",            KeyType::string,       "csv",       "raw output format: csv | jsonl"},
    {"out",               KeyType::path,         "",          "primary output file"},
    {"summary",           KeyType::path,         "",          "aggregate summary CSV"},
    {"histogram",         KeyType::path,         "",          "log histogram CSV of failure times"},
    {"bins_per_decade",   KeyType::integer,      "4",         "histogram resolution"},
    {"node_map",          KeyType::path,         "",          "dense id -> public key CSV for snapshot inputs"},
    {"bounds_out",        KeyType::path,         "",          "per-edge k^2/g(e) CSV"},
    {"k_from",            KeyType::integer,      "",          "sweep start (capacity convention applies)"},
    {"k_to",              KeyType::integer,      "",          "sweep end, inclusive"},
    {"k_step",            KeyType::integer,      "",          "sweep increment"},
    {"horizon",           KeyType::integer,      "",          "also report P(tau <= horizon) per sweep point"},
    {"p_select",          KeyType::real,         "",          "independent-chains selection probability (default: ring edge probability)"},
    {"half_degree",       KeyType::integer,      "2",         "small-world lattice neighbours per side"},
    {"rewire",            KeyType::real,         "0.1",       "small-world rewiring probability"},
    {"cap_lo",            KeyType::integer,      "",          "log-uniform capacity lower end (small-world)"},
    {"cap_hi",            KeyType::integer,      "",          "log-uniform capacity upper end (small-world)"},
    {"alpha",             KeyType::real,         "2",         "capacity-floor warning constant"},
    {"seeds",             KeyType::integer,      "100",       "number of seeds for couple-check"},
    {"fault",             KeyType::string,       "none",      "couple-check fault injection: none | flip_orientation"},
    {"points",            KeyType::path,         "",          "fit input CSV with columns n,mean_tau"},
    {"model",             KeyType::string,       "both",      "fit model: upper | lower | both"},
  };
  return schema;
}
// clang-format on

inline const KeySpec* find_key(std::string_view name) {
  for (const auto& k : recipe_schema())
    if (k.name == name) return &k;
  return nullptr;
}

/// Keys each subcommand accepts.
inline const std::map<std::string, std::vector<std::string>, std::less<>>& command_keys() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> keys = {
      {"simulate",
       {"topology", "nodes", "balance", "capacity", "capacity_is_total", "graph", "snapshot", "plan", "strategy", "amount",
        "amounts", "stop", "runs", "seed", "max_steps", "workers", "format", "out", "summary", "histogram",
        "bins_per_decade", "node_map", "p_select", "half_degree", "rewire", "cap_lo", "cap_hi"}},
      {"sweep",
       {"topology", "nodes", "graph", "snapshot", "capacity_is_total", "k_from", "k_to", "k_step", "amount", "stop", "runs",
        "seed", "max_steps", "workers", "out", "horizon", "p_select", "half_degree", "rewire"}},
      {"betweenness",
       {"topology", "nodes", "balance", "capacity", "capacity_is_total", "graph", "snapshot", "plan", "seed", "workers",
        "out", "bounds_out", "alpha", "node_map", "half_degree", "rewire", "cap_lo", "cap_hi"}},
      {"redistribute",
       {"topology", "nodes", "balance", "capacity", "capacity_is_total", "graph", "snapshot", "strategy", "seed", "workers",
        "out", "node_map", "half_degree", "rewire", "cap_lo", "cap_hi"}},
      {"couple-check", {"nodes", "balance", "capacity", "capacity_is_total", "seeds", "seed", "max_steps", "out", "fault"}},
      {"fit", {"points", "model", "balance", "capacity", "capacity_is_total", "out"}},
      {"graph",
       {"topology", "nodes", "balance", "capacity", "capacity_is_total", "graph", "snapshot", "plan", "seed", "out",
        "node_map", "half_degree", "rewire", "cap_lo", "cap_hi"}},
  };
  return keys;
}

/// Raw key/value assignments with a description of where each came from.
struct KeyValues {
  std::map<std::string, std::pair<std::string, std::string>> entries;  // key -> (value, origin)

  void set(std::string key, std::string value, std::string origin) {
    std::replace(key.begin(), key.end(), '-', '_');
    entries[std::move(key)] = {std::move(value), std::move(origin)};
  }
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline KeyValues parse_recipe(std::istream& is, const std::string& source = "config") {
  KeyValues kv;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string origin = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value', got '" + body + "'");
    auto key = trim(std::string_view(body).substr(0, eq));
    auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    kv.set(std::move(key), std::move(value), origin);
  }
  return kv;
}

namespace detail {

inline bool parse_i64(std::string_view s, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
  return false;
}

inline std::vector<std::int64_t> parse_list(std::string_view s) {
  std::vector<std::int64_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    std::int64_t v = 0;
    if (!parse_i64(trim(s.substr(start, end - start)), v)) throw std::invalid_argument("bad list element");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace detail

class RecipeConfig {
 public:
  const std::string& command() const noexcept { return command_; }

  bool has(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }

  const std::string& str(std::string_view key) const {
    auto it = values_.find(std::string(key));
    if (it == values_.end()) throw ConfigError("config error: key '" + std::string(key) + "' is required for " + command_);
    return it->second;
  }

  std::int64_t integer(std::string_view key) const {
    std::int64_t v = 0;
    detail::parse_i64(str(key), v);
    return v;
  }
  std::int64_t integer_or(std::string_view key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }
  double real(std::string_view key) const { return std::stod(str(key)); }
  bool flag(std::string_view key) const {
    bool b = false;
    detail::parse_bool(str(key), b);
    return b;
  }
  std::vector<std::int64_t> integers(std::string_view key) const { return detail::parse_list(str(key)); }

  /// Integer constrained to [lo, hi], with a key-path diagnostic otherwise.
  std::int64_t integer_in(std::string_view key, std::int64_t lo, std::int64_t hi = INT64_MAX) const {
    const auto v = integer(key);
    if (v < lo || v > hi)
      throw ConfigError("config error: key '" + std::string(key) + "' = " + std::to_string(v) + " out of range [" +
                        std::to_string(lo) + ", " + (hi == INT64_MAX ? std::string("inf") : std::to_string(hi)) + "]");
    return v;
  }

  /// Resolved configuration as metadata, sorted by key, without
  /// execution-only keys.
  Metadata echo() const {
    Metadata meta;
    meta.emplace_back("command", command_);
    for (const auto& [k, v] : values_) {
      const auto* spec = find_key(k);
      if (spec && !spec->echo) continue;
      meta.emplace_back("config." + k, v);
    }
    return meta;
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  friend RecipeConfig resolve_recipe(const std::string& command, const KeyValues& file, const KeyValues& flags,
                                     std::optional<std::string> env_seed);

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

/// Merges defaults, file and flags for `command`, validating every key.
inline RecipeConfig resolve_recipe(const std::string& command, const KeyValues& file, const KeyValues& flags,
                                   std::optional<std::string> env_seed = std::nullopt) {
  auto cmd = command_keys().find(command);
  if (cmd == command_keys().end()) throw ConfigError("unknown command '" + command + "'");
  const auto& allowed = cmd->second;
  auto is_allowed = [&](const std::string& k) { return std::find(allowed.begin(), allowed.end(), k) != allowed.end(); };

  RecipeConfig r;
  r.command_ = command;
  std::map<std::string, std::string> origin;
  for (const auto& k : allowed) {
    const auto* spec = find_key(k);
    if (spec && !spec->default_value.empty()) {
      r.values_[k] = std::string(spec->default_value);
      origin[k] = "default";
    }
  }
  for (const auto* layer : {&file, &flags}) {
    for (const auto& [k, vo] : layer->entries) {
      if (!find_key(k)) throw ConfigError(vo.second + ": unknown key '" + k + "'");
      if (!is_allowed(k)) throw ConfigError(vo.second + ": key '" + k + "' does not apply to " + command);
      r.values_[k] = vo.first;
      origin[k] = vo.second;
    }
  }
  if (!r.has("seed") && is_allowed("seed")) {
    r.values_["seed"] = env_seed ? *env_seed : "1";
    origin["seed"] = env_seed ? "PCN_SIM_SEED" : "default";
  }
  for (const auto& [k, v] : r.values_) {
    const auto* spec = find_key(k);
    const std::string where = origin[k] + ": key '" + k + "'";
    switch (spec->type) {
      case KeyType::integer: {
        std::int64_t x = 0;
        if (!detail::parse_i64(v, x)) throw ConfigError(where + ": expected an integer, got '" + v + "'");
        break;
      }
      case KeyType::real: {
        std::istringstream ss(v);
        double x = 0;
        if (!(ss >> x) || !ss.eof()) throw ConfigError(where + ": expected a number, got '" + v + "'");
        break;
      }
      case KeyType::boolean: {
        bool b = false;
        if (!detail::parse_bool(v, b)) throw ConfigError(where + ": expected true/false, got '" + v + "'");
        break;
      }
      case KeyType::integer_list:
        try {
          detail::parse_list(v);
        } catch (const std::exception&) {
          throw ConfigError(where + ": expected comma-separated integers, got '" + v + "'");
        }
        break;
      case KeyType::path:
        if (v.empty()) throw ConfigError(where + ": empty path");
        break;
      case KeyType::string:
        break;
    }
  }
  return r;
}

}  // namespace pcnsim
