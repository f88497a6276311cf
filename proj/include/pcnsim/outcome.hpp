#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pcnsim/channel_graph.hpp"

namespace pcnsim {

enum class FailureKind { depleted, attempt_failed, step_cap_reached };

inline std::string_view to_string(FailureKind k) noexcept {
  switch (k) {
    case FailureKind::depleted: return "depleted";
    case FailureKind::attempt_failed: return "attempt_failed";
    case FailureKind::step_cap_reached: return "step_cap_reached";
  }
  return "?";
}

inline FailureKind parse_failure_kind(std::string_view s) {
  if (s == "depleted") return FailureKind::depleted;
  if (s == "attempt_failed") return FailureKind::attempt_failed;
  if (s == "step_cap_reached") return FailureKind::step_cap_reached;
  throw std::invalid_argument("unknown failure kind '" + std::string(s) + "'");
}

/// Result of one simulated run. `tau` counts successfully completed rounds.
struct RunOutcome {
  std::uint64_t tau{0};
  std::optional<EdgeId> failing_edge;
  FailureKind kind{FailureKind::step_cap_reached};
  std::uint64_t seed{0};

  bool censored() const noexcept { return kind == FailureKind::step_cap_reached; }
  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

}  // namespace pcnsim
