#pragma once

// Subcommand implementations behind the pcnsim CLI. Each takes a resolved
// RecipeConfig, writes result files to explicit paths, prints a short
// human-readable report on `out` and diagnostics on `log`.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error,
// 3 property-check failure.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcnsim/capacity_planner.hpp"
#include "pcnsim/chain_analytics.hpp"
#include "pcnsim/channel_graph.hpp"
#include "pcnsim/path_engine.hpp"
#include "pcnsim/recipe.hpp"
#include "pcnsim/results_io.hpp"
#include "pcnsim/sim_core.hpp"
#include "pcnsim/snapshot.hpp"

namespace pcnsim {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitCheckFailed = 3 };

namespace cli {

inline const char* kTopologies = "clique, ring, independent, chains, smallworld (or give graph=/snapshot=)";

/// Per-side balance from balance= or capacity= under the capacity convention.
inline std::optional<std::int64_t> per_side_balance(const RecipeConfig& r) {
  if (r.has("balance") && r.has("capacity")) throw ConfigError("config error: give either 'balance' or 'capacity', not both");
  if (r.has("balance")) return r.integer_in("balance", 1);
  if (!r.has("capacity")) return std::nullopt;
  const auto c = r.integer_in("capacity", 1);
  if (r.has("capacity_is_total") && r.flag("capacity_is_total")) {
    if (c < 2 || c % 2 != 0) throw ConfigError("config error: key 'capacity' must be even and >= 2 when capacity_is_total");
    return c / 2;
  }
  return c;
}

inline std::int64_t require_balance(const RecipeConfig& r) {
  auto k = per_side_balance(r);
  if (!k) throw ConfigError("config error: key 'balance' (or 'capacity') is required for " + r.command());
  return *k;
}

inline std::string topology_name(const RecipeConfig& r) {
  if (r.has("snapshot")) return "snapshot";
  if (r.has("graph")) return "graph";
  if (!r.has("topology")) throw ConfigError(std::string("config error: key 'topology' is required (valid: ") + kTopologies + ")");
  const auto& t = r.str("topology");
  for (const char* valid : {"clique", "ring", "independent", "chains", "smallworld"})
    if (t == valid) return t;
  throw ConfigError("config error: key 'topology': unknown value '" + t + "' (valid: " + kTopologies + ")");
}

struct LoadedGraph {
  ChannelGraph graph;
  std::vector<std::string> node_keys;
  bool from_file{false};
};

inline void write_node_map(const std::string& path, const std::vector<std::string>& keys) {
  emit_file(path, [&](std::ostream& os) {
    os << "dense_id,pub_key\n";
    for (std::size_t i = 0; i < keys.size(); ++i) os << i << ',' << keys[i] << '\n';
  });
}

inline LoadedGraph load_graph(const RecipeConfig& r, std::ostream& log) {
  LoadedGraph lg;
  const auto topo = topology_name(r);
  if (topo == "snapshot") {
    std::ifstream is(r.str("snapshot"));
    if (!is) throw std::runtime_error("cannot open snapshot '" + r.str("snapshot") + "'");
    auto ingested = ingest_giant_component(parse_snapshot(is));
    for (const auto& w : ingested.warnings) log << "warning: " << w << '\n';
    lg.graph = std::move(ingested.graph);
    lg.node_keys = std::move(ingested.node_keys);
    lg.from_file = true;
    if (r.has("node_map")) write_node_map(r.str("node_map"), lg.node_keys);
  } else if (topo == "graph") {
    std::ifstream is(r.str("graph"));
    if (!is) throw std::runtime_error("cannot open graph '" + r.str("graph") + "'");
    lg.graph = read_edge_list(is);
    lg.from_file = true;
  } else if (topo == "clique" || topo == "ring") {
    const auto n = static_cast<std::size_t>(r.integer_in("nodes", topo == "clique" ? 2 : 3));
    const auto k = require_balance(r);
    lg.graph = topo == "clique" ? make_clique(n, 2 * k) : make_ring(n, 2 * k);
  } else if (topo == "smallworld") {
    const auto n = static_cast<std::size_t>(r.integer_in("nodes", 3));
    Rng rng(static_cast<std::uint64_t>(r.integer("seed")));
    const auto k = per_side_balance(r);
    const bool log_uniform = r.has("cap_lo") || r.has("cap_hi");
    if (!k && !log_uniform) throw ConfigError("config error: smallworld needs 'balance'/'capacity' or 'cap_lo'+'cap_hi'");
    auto g = make_small_world(n, static_cast<std::size_t>(r.integer_in("half_degree", 1)), r.real("rewire"), 2 * k.value_or(1), rng);
    auto giant = giant_component(g);
    if (giant.graph.node_count() != g.node_count())
      log << "warning: small-world graph disconnected; using giant component of " << giant.graph.node_count() << " nodes\n";
    lg.graph = std::move(giant.graph);
    if (log_uniform) lg.graph = with_log_uniform_capacities(lg.graph, r.integer_in("cap_lo", 1), r.integer_in("cap_hi", 1), rng);
  } else {
    throw ConfigError("config error: topology '" + topo + "' is not a graph for " + r.command());
  }
  if (lg.from_file && r.command() != "sweep") {
    if (auto k = per_side_balance(r)) lg.graph = lg.graph.with_uniform_capacity(2 * *k);
  }
  if (r.has("plan")) {
    std::ifstream is(r.str("plan"));
    if (!is) throw std::runtime_error("cannot open plan '" + r.str("plan") + "'");
    auto caps = read_plan_capacities(is);
    if (caps.size() != lg.graph.edge_count())
      throw ConfigError("config error: key 'plan': plan has " + std::to_string(caps.size()) + " edges, graph has " +
                        std::to_string(lg.graph.edge_count()));
    lg.graph = lg.graph.with_capacities(caps);
  }
  return lg;
}

inline std::string with_suffix(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + tag;
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

inline void echo_config(std::ostream& log, const Metadata& meta) {
  for (const auto& [k, v] : meta) log << "# " << k << '=' << v << '\n';
}

inline SimConfig sim_config(const RecipeConfig& r, StopMode default_stop) {
  SimConfig cfg;
  cfg.amount = r.has("amount") ? r.integer_in("amount", 1) : 1;
  cfg.stop_mode = r.has("stop") ? parse_stop_mode(r.str("stop")) : default_stop;
  cfg.runs = static_cast<std::size_t>(r.integer_in("runs", 1));
  cfg.base_seed = static_cast<std::uint64_t>(r.integer("seed"));
  cfg.max_steps = static_cast<std::uint64_t>(r.integer_in("max_steps", 1));
  cfg.workers = static_cast<unsigned>(r.integer_in("workers", 0, 4096));
  return cfg;
}

inline void print_table_header(std::ostream& out, const std::string& key) {
  out << std::left << std::setw(12) << key << std::right << std::setw(14) << "min" << std::setw(14) << "max" << std::setw(16)
      << "mean" << std::setw(16) << "std" << std::setw(10) << "censored" << '\n';
}

inline void print_table_row(std::ostream& out, const Aggregate& a) {
  out << std::left << std::setw(12) << a.point << std::right << std::setw(14) << format_real(a.min) << std::setw(14)
      << format_real(a.max) << std::setw(16) << format_real(a.mean) << std::setw(16) << format_real(a.std) << std::setw(10)
      << a.censored << '\n';
}

inline BetweennessMap betweenness_for(const ChannelGraph& g, const RecipeConfig& r) {
  return edge_betweenness(g, static_cast<unsigned>(r.integer_or("workers", 0)));
}

}  // namespace cli

// ---------------------------------------------------------------------------

inline int cmd_simulate(RecipeConfig r, std::ostream& out, std::ostream& log) {
  const auto topo = cli::topology_name(r);
  const bool chain_topology = topo == "independent" || topo == "chains";
  const StopMode default_stop = (topo == "snapshot" || topo == "graph") ? StopMode::attempt_failure : StopMode::depletion;
  auto cfg = cli::sim_config(r, default_stop);
  r.set("stop", std::string(to_string(cfg.stop_mode)));

  std::vector<Amount> amounts;
  if (r.has("amounts")) {
    for (auto a : r.integers("amounts")) {
      if (a < 1) throw ConfigError("config error: key 'amounts': every amount must be >= 1");
      amounts.push_back(a);
    }
  } else {
    amounts.push_back(cfg.amount);
  }

  std::vector<std::pair<Amount, std::vector<RunOutcome>>> campaigns;
  Metadata extra;
  if (chain_topology) {
    const auto n = static_cast<std::size_t>(r.integer_in("nodes", 1));
    const auto k = cli::require_balance(r);
    if (amounts.size() != 1 || amounts[0] != 1) throw ConfigError("config error: chain topologies only support amount 1");
    if (topo == "independent") {
      const double p = r.has("p_select") ? r.real("p_select") : ring_edge_probability(std::max<std::size_t>(n, 3));
      extra.emplace_back("p_select", format_real(p));
      cli::echo_config(log, r.echo());
      campaigns.emplace_back(1, monte_carlo_independent(n, k, p, cfg));
    } else {
      cli::echo_config(log, r.echo());
      campaigns.emplace_back(1, monte_carlo_bdc(n, k, cfg));
    }
  } else {
    auto lg = cli::load_graph(r, log);
    ChannelGraph g = std::move(lg.graph);
    const auto strategy = parse_plan_strategy(r.str("strategy"));
    if (strategy != PlanStrategy::original) {
      std::optional<BetweennessMap> bmap;
      if (strategy == PlanStrategy::xi_optimized) bmap = cli::betweenness_for(g, r);
      auto plan = make_plan(g, strategy, bmap ? &*bmap : nullptr);
      g = g.with_capacities(plan.capacity);
    }
    if (!is_connected(g)) throw ConfigError("config error: input graph is disconnected");
    extra.emplace_back("n", std::to_string(g.node_count()));
    extra.emplace_back("m", std::to_string(g.edge_count()));
    extra.emplace_back("total_capacity", std::to_string(g.total_capacity()));
    cli::echo_config(log, r.echo());
    for (auto a : amounts) {
      auto c = cfg;
      c.amount = a;
      campaigns.emplace_back(a, monte_carlo(g, c));
    }
  }

  Metadata meta = base_metadata();
  for (auto& kv : r.echo()) meta.push_back(kv);
  for (auto& kv : extra) meta.push_back(kv);
  const auto format = parse_output_format(r.str("format"));
  const bool multi = campaigns.size() > 1;

  // without an output file the raw outcomes go to stdout and the summary table to the log
  const bool raw_to_stdout = !r.has("out") && !multi;
  std::ostream& table = raw_to_stdout ? log : out;
  std::vector<Aggregate> rows;
  cli::print_table_header(table, "amount");
  for (const auto& [a, outcomes] : campaigns) {
    rows.push_back(aggregate(outcomes, std::to_string(a)));
    cli::print_table_row(table, rows.back());
    auto m = meta;
    m.emplace_back("amount", std::to_string(a));
    if (raw_to_stdout) write_outcomes(out, m, outcomes, format);
    if (r.has("out")) {
      const auto path = multi ? cli::with_suffix(r.str("out"), "amount-" + std::to_string(a)) : r.str("out");
      emit_file(path, [&](std::ostream& os) { write_outcomes(os, m, outcomes, format); });
    }
    if (r.has("histogram")) {
      const auto path = multi ? cli::with_suffix(r.str("histogram"), "amount-" + std::to_string(a)) : r.str("histogram");
      const auto h = log_histogram(outcomes, static_cast<int>(r.integer_in("bins_per_decade", 1)));
      emit_file(path, [&](std::ostream& os) { write_histogram(os, m, h); });
    }
  }
  if (r.has("summary")) emit_file(r.str("summary"), [&](std::ostream& os) { write_aggregates(os, meta, rows, "amount"); });
  return kExitOk;
}

inline int cmd_sweep(RecipeConfig r, std::ostream& out, std::ostream& log) {
  const auto topo = cli::topology_name(r);
  const StopMode default_stop = (topo == "snapshot" || topo == "graph") ? StopMode::attempt_failure : StopMode::depletion;
  auto cfg = cli::sim_config(r, default_stop);
  r.set("stop", std::string(to_string(cfg.stop_mode)));
  const auto from = r.integer_in("k_from", 1), to = r.integer_in("k_to", 1), step = r.integer_in("k_step", 1);
  if (from > to) throw ConfigError("config error: key 'k_from' must be <= 'k_to'");
  const bool total = r.flag("capacity_is_total");
  if (total && (from % 2 != 0 || step % 2 != 0))
    throw ConfigError("config error: with capacity_is_total, 'k_from' and 'k_step' must be even");
  const std::int64_t div = total ? 2 : 1;

  TopologySpec spec;
  std::optional<ChannelGraph> graph;
  if (topo == "clique" || topo == "ring" || topo == "independent") {
    spec.kind = topo == "clique" ? TopologyKind::clique : topo == "ring" ? TopologyKind::ring : TopologyKind::independent_chains;
    spec.nodes = static_cast<std::size_t>(r.integer_in("nodes", topo == "clique" ? 2 : topo == "ring" ? 3 : 1));
    if (r.has("p_select")) spec.p_select = r.real("p_select");
    if (spec.kind == TopologyKind::independent_chains && !spec.p_select)
      spec.p_select = ring_edge_probability(std::max<std::size_t>(spec.nodes, 3));
  } else if (topo == "graph" || topo == "snapshot" || topo == "smallworld") {
    RecipeConfig graph_recipe = r;
    if (topo == "smallworld") graph_recipe.set("balance", "1");
    graph = cli::load_graph(graph_recipe, log).graph;
    if (!is_connected(*graph)) throw ConfigError("config error: input graph is disconnected");
    spec.kind = TopologyKind::graph;
    spec.graph = &*graph;
    spec.nodes = graph->node_count();
  } else {
    throw ConfigError("config error: sweep does not support topology '" + topo + "'");
  }
  cli::echo_config(log, r.echo());

  const auto points = capacity_sweep(spec, from / div, to / div, step / div, cfg);
  std::vector<Aggregate> rows;
  std::vector<double> horizon_prob;
  cli::print_table_header(out, "capacity");
  for (const auto& p : points) {
    rows.push_back(p.summary);
    rows.back().point = std::to_string(p.k * div);
    if (r.has("horizon")) horizon_prob.push_back(failure_within(p.outcomes, static_cast<std::uint64_t>(r.integer_in("horizon", 0))));
    cli::print_table_row(out, rows.back());
  }
  Metadata meta = base_metadata();
  for (auto& kv : r.echo()) meta.push_back(kv);
  if (spec.p_select) meta.emplace_back("p_select", format_real(*spec.p_select));
  if (r.has("out")) emit_file(r.str("out"), [&](std::ostream& os) { write_aggregates(os, meta, rows, "capacity", horizon_prob); });
  return kExitOk;
}

inline int cmd_betweenness(const RecipeConfig& r, std::ostream& out, std::ostream& log) {
  auto g = cli::load_graph(r, log).graph;
  cli::echo_config(log, r.echo());
  const auto bmap = cli::betweenness_for(g, r);
  const auto report = xi_and_bounds(g, bmap, r.real("alpha"));
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';

  std::vector<EdgeId> order(g.edge_count());
  std::iota(order.begin(), order.end(), EdgeId{0});
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return bmap.value[a] > bmap.value[b]; });
  Metadata meta = base_metadata();
  for (auto& kv : r.echo()) meta.push_back(kv);
  meta.emplace_back("n", std::to_string(g.node_count()));
  meta.emplace_back("m", std::to_string(g.edge_count()));
  meta.emplace_back("pairs", "unordered_distinct");
  auto write_csv = [&](std::ostream& os) {
    write_metadata(os, meta);
    os << "edge_id,u,v,capacity,betweenness,selection_probability\n";
    for (EdgeId e : order) {
      const auto& c = g.edge(e);
      os << e << ',' << c.u << ',' << c.v << ',' << c.capacity << ',' << format_real(bmap.value[e]) << ','
         << format_real(edge_selection_probability(g, bmap, e)) << '\n';
    }
  };
  if (r.has("out")) emit_file(r.str("out"), write_csv);
  else write_csv(out);

  if (r.has("bounds_out")) {
    auto bmeta = meta;
    bmeta.emplace_back("xi", format_real(report.xi));
    bmeta.emplace_back("argmin_edge", report.argmin_edge ? std::to_string(*report.argmin_edge) : "none");
    bmeta.emplace_back("lower_bound_order", format_real(report.lower_bound_value));
    bmeta.emplace_back("upper_bound_order", format_real(report.upper_bound_value));
    bmeta.emplace_back("lower_bound_proof", format_real(report.lower_proof_value));
    bmeta.emplace_back("upper_bound_proof", format_real(report.upper_proof_value));
    for (std::size_t i = 0; i < report.warnings.size(); ++i) bmeta.emplace_back("warning" + std::to_string(i), report.warnings[i]);
    emit_file(r.str("bounds_out"), [&](std::ostream& os) {
      write_metadata(os, bmeta);
      os << "edge_id,k,g,ratio\n";
      for (EdgeId e = 0; e < g.edge_count(); ++e)
        os << e << ',' << format_real(report.per_side[e]) << ',' << format_real(report.betweenness[e]) << ','
           << format_real(report.per_edge_ratios[e]) << '\n';
    });
  }
  log << "xi=" << format_real(report.xi) << " argmin_edge=" << (report.argmin_edge ? std::to_string(*report.argmin_edge) : "none")
      << " lower(order)=" << format_real(report.lower_bound_value) << " upper(order)=" << format_real(report.upper_bound_value)
      << '\n';
  return kExitOk;
}

inline int cmd_redistribute(const RecipeConfig& r, std::ostream& out, std::ostream& log) {
  auto g = cli::load_graph(r, log).graph;
  cli::echo_config(log, r.echo());
  const auto strategy = parse_plan_strategy(r.str("strategy"));
  const auto bmap = cli::betweenness_for(g, r);
  const auto plan = make_plan(g, strategy, &bmap);
  Metadata meta = base_metadata();
  for (auto& kv : r.echo()) meta.push_back(kv);
  if (r.has("out")) emit_file(r.str("out"), [&](std::ostream& os) { write_plan(os, meta, g, plan, bmap); });
  else write_plan(out, meta, g, plan, bmap);
  const auto before = xi_and_bounds(g, bmap, 2.0).xi;
  const auto after = xi_and_bounds(g.with_capacities(plan.capacity), bmap, 2.0).xi;
  log << "conservation: total_before=" << plan.total_before << " total_after=" << plan.total_after << ' '
      << (plan.conserved() ? "OK" : "VIOLATED") << '\n';
  log << "xi: before=" << format_real(before) << " after=" << format_real(after) << '\n';
  return plan.conserved() ? kExitOk : kExitCheckFailed;
}

inline int cmd_couple_check(const RecipeConfig& r, std::ostream& out, std::ostream& log) {
  const auto n = static_cast<std::size_t>(r.integer_in("nodes", 2));
  const auto k = cli::require_balance(r);
  const auto seeds = static_cast<std::size_t>(r.integer_in("seeds", 1));
  const auto base = static_cast<std::uint64_t>(r.integer("seed"));
  const auto max_steps = static_cast<std::uint64_t>(r.integer_in("max_steps", 1));
  const auto& fault_name = r.str("fault");
  CouplingFault fault = CouplingFault::none;
  if (fault_name == "flip_orientation") fault = CouplingFault::flip_orientation_on_odd_rounds;
  else if (fault_name != "none") throw ConfigError("config error: key 'fault': unknown value '" + fault_name + "' (valid: none, flip_orientation)");
  cli::echo_config(log, r.echo());

  std::size_t mismatches = 0;
  std::ostringstream rows;
  rows << "seed,tau_payment,tau_chains,match\n";
  for (std::size_t i = 0; i < seeds; ++i) {
    Rng rng(derive_seed(base, i));
    const auto c = run_coupled_clique(n, k, max_steps, rng, fault);
    const bool match = c.payment.tau == c.chains.tau && c.payment.kind == c.chains.kind;
    if (!match) ++mismatches;
    rows << rng.seed() << ',' << c.payment.tau << ',' << c.chains.tau << ',' << (match ? "true" : "false") << '\n';
  }
  if (r.has("out")) {
    Metadata meta = base_metadata();
    for (auto& kv : r.echo()) meta.push_back(kv);
    emit_file(r.str("out"), [&](std::ostream& os) {
      write_metadata(os, meta);
      os << rows.str();
    });
  }
  out << "couple-check n=" << n << " k=" << k << ": " << (seeds - mismatches) << '/' << seeds << " seeds with tau1 == tau2\n";
  return mismatches == 0 ? kExitOk : kExitCheckFailed;
}

inline std::vector<FitPoint> read_fit_points(std::istream& is) {
  std::vector<FitPoint> pts;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line == "n,mean_tau") continue;
      throw std::invalid_argument("fit points: expected header 'n,mean_tau', got '" + line + "'");
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("fit points: malformed row '" + line + "'");
    pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return pts;
}

inline int cmd_fit(const RecipeConfig& r, std::ostream& out, std::ostream& log) {
  const auto k = static_cast<double>(cli::require_balance(r));
  std::ifstream is(r.str("points"));
  if (!is) throw std::runtime_error("cannot open points '" + r.str("points") + "'");
  const auto pts = read_fit_points(is);
  for (const auto& p : pts)
    if (p.n < 3) throw ConfigError("config error: key 'points': every n must be >= 3");
  const auto& model = r.str("model");
  std::vector<FitModel> models;
  if (model == "both") models = {FitModel::upper, FitModel::lower};
  else models = {parse_fit_model(model)};
  cli::echo_config(log, r.echo());
  std::ostringstream body;
  body << "model,p,residual\n";
  for (auto m : models) {
    const double p = fit_scale(pts, m, k);
    const double res = fit_residual(pts, m, k, p);
    body << (m == FitModel::upper ? "upper" : "lower") << ',' << format_real(p) << ',' << format_real(res) << '\n';
  }
  out << body.str();
  if (r.has("out")) {
    Metadata meta = base_metadata();
    for (auto& kv : r.echo()) meta.push_back(kv);
    emit_file(r.str("out"), [&](std::ostream& os) {
      write_metadata(os, meta);
      os << body.str();
    });
  }
  return kExitOk;
}

inline int cmd_graph(const RecipeConfig& r, std::ostream& out, std::ostream& log) {
  const auto g = cli::load_graph(r, log).graph;
  cli::echo_config(log, r.echo());
  if (r.has("out")) emit_file(r.str("out"), [&](std::ostream& os) { write_edge_list(os, g); });
  else write_edge_list(out, g);
  log << "graph: n=" << g.node_count() << " m=" << g.edge_count() << " total_capacity=" << g.total_capacity() << '\n';
  return kExitOk;
}

/// Dispatches a resolved recipe and maps failures to exit codes.
inline int run_command(const RecipeConfig& r, std::ostream& out, std::ostream& log) {
  try {
    const auto& c = r.command();
    if (c == "simulate") return cmd_simulate(r, out, log);
    if (c == "sweep") return cmd_sweep(r, out, log);
    if (c == "betweenness") return cmd_betweenness(r, out, log);
    if (c == "redistribute") return cmd_redistribute(r, out, log);
    if (c == "couple-check") return cmd_couple_check(r, out, log);
    if (c == "fit") return cmd_fit(r, out, log);
    if (c == "graph") return cmd_graph(r, out, log);
    log << "error: unknown command '" << c << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace pcnsim
