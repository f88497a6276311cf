#pragma once

// Ingestion of LND `describegraph` JSON snapshots.
//
// Expected shape: {"nodes": [{"pub_key": ...}, ...],
//                  "edges": [{"node1_pub": ..., "node2_pub": ..., "capacity": "<sats>"}, ...]}
// Unknown fields are ignored. Parallel channels between one endpoint pair are
// merged by summing capacities; self-loops are dropped with a warning.

#include <charconv>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pcnsim/channel_graph.hpp"

namespace pcnsim {

struct SnapshotChannel {
  std::string node1;
  std::string node2;
  Amount capacity{0};
};

struct SnapshotDocument {
  std::vector<std::string> node_keys;
  std::vector<SnapshotChannel> channels;
};

struct IngestedGraph {
  ChannelGraph graph;
  std::vector<std::string> node_keys;  // dense id -> public key
  std::vector<std::string> warnings;
};

namespace detail {

inline Amount parse_capacity(const nlohmann::json& value, std::size_t index) {
  const std::string where = "snapshot: edges[" + std::to_string(index) + "].capacity";
  long long parsed = 0;
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), parsed);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
      throw std::invalid_argument(where + ": not a decimal integer: '" + s + "'");
  } else if (value.is_number_integer()) {
    parsed = value.get<long long>();
  } else {
    throw std::invalid_argument(where + ": expected a decimal string");
  }
  if (parsed <= 0) throw std::invalid_argument(where + ": capacity must be positive, got " + std::to_string(parsed));
  return parsed;
}

}  // namespace detail

inline SnapshotDocument parse_snapshot(std::istream& is) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("snapshot: malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges") || !doc["nodes"].is_array() ||
      !doc["edges"].is_array()) {
    throw std::invalid_argument("snapshot: expected top-level arrays 'nodes' and 'edges'");
  }
  SnapshotDocument out;
  std::size_t i = 0;
  for (const auto& node : doc["nodes"]) {
    if (!node.is_object() || !node.contains("pub_key") || !node["pub_key"].is_string())
      throw std::invalid_argument("snapshot: nodes[" + std::to_string(i) + "] lacks string 'pub_key'");
    out.node_keys.push_back(node["pub_key"].get<std::string>());
    ++i;
  }
  i = 0;
  for (const auto& edge : doc["edges"]) {
    const std::string where = "snapshot: edges[" + std::to_string(i) + "]";
    if (!edge.is_object()) throw std::invalid_argument(where + ": not an object");
    for (const char* key : {"node1_pub", "node2_pub", "capacity"}) {
      if (!edge.contains(key)) throw std::invalid_argument(where + ": missing '" + key + "'");
    }
    if (!edge["node1_pub"].is_string() || !edge["node2_pub"].is_string())
      throw std::invalid_argument(where + ": endpoint keys must be strings");
    out.channels.push_back({edge["node1_pub"].get<std::string>(), edge["node2_pub"].get<std::string>(),
                            detail::parse_capacity(edge["capacity"], i)});
    ++i;
  }
  return out;
}

inline IngestedGraph ingest_snapshot(const SnapshotDocument& doc) {
  IngestedGraph out;
  std::unordered_map<std::string, NodeId> index;
  for (const auto& key : doc.node_keys) {
    if (index.emplace(key, static_cast<NodeId>(out.node_keys.size())).second) {
      out.node_keys.push_back(key);
    } else {
      out.warnings.push_back("duplicate node key " + key + " ignored");
    }
  }
  std::map<std::pair<NodeId, NodeId>, std::size_t> slot;
  std::vector<Channel> merged;
  std::size_t parallel = 0;
  for (std::size_t i = 0; i < doc.channels.size(); ++i) {
    const auto& ch = doc.channels[i];
    if (ch.capacity <= 0) throw std::invalid_argument("snapshot: channel " + std::to_string(i) + " has non-positive capacity");
    auto a = index.find(ch.node1);
    auto b = index.find(ch.node2);
    if (a == index.end() || b == index.end()) {
      throw std::invalid_argument("snapshot: channel " + std::to_string(i) + " references unknown node " +
                                  (a == index.end() ? ch.node1 : ch.node2));
    }
    if (a->second == b->second) {
      out.warnings.push_back("self-loop channel " + std::to_string(i) + " on " + ch.node1 + " dropped");
      continue;
    }
    auto key = std::minmax(a->second, b->second);
    auto [it, inserted] = slot.emplace(std::pair{key.first, key.second}, merged.size());
    if (inserted) {
      merged.push_back({key.first, key.second, ch.capacity});
    } else {
      merged[it->second].capacity += ch.capacity;
      ++parallel;
    }
  }
  if (parallel > 0) out.warnings.push_back(std::to_string(parallel) + " parallel channel(s) merged by capacity sum");
  out.graph = ChannelGraph(out.node_keys.size(), std::move(merged));
  return out;
}

/// Snapshot restricted to its giant component, keys re-indexed to match.
inline IngestedGraph ingest_giant_component(const SnapshotDocument& doc) {
  auto full = ingest_snapshot(doc);
  auto giant = giant_component(full.graph);
  IngestedGraph out;
  out.graph = std::move(giant.graph);
  out.node_keys.reserve(giant.original_ids.size());
  for (auto id : giant.original_ids) out.node_keys.push_back(full.node_keys[id]);
  out.warnings = std::move(full.warnings);
  return out;
}

}  // namespace pcnsim
