#pragma once

#include <optional>

#include "ttvi/operators.hpp"

namespace ttvi {

/// Per-subsystem policy slices of one DFA mode for one step.
struct ModeSlices {
  std::vector<PolicySlice> per_subsystem;
};

/// Slices for every mode carrying value this step, indexed by DFA state;
/// disengaged modes (dead ones and the accepting mode) stay empty.
using PolicyStepSlices = std::vector<std::optional<ModeSlices>>;

/// Time-varying decoupled policy in execution order: steps[0] applies at the
/// first transition. Episodes longer than the stored horizon reuse the final
/// step, so a single stored step is a stationary policy.
struct DecoupledPolicy {
  std::vector<PolicyStepSlices> steps;

  const PolicyStepSlices& step(std::size_t t) const {
    return steps[t < steps.size() ? t : steps.size() - 1];
  }
  bool empty() const { return steps.empty(); }
};

/// Versioned policy snapshot: per (q, subsystem, step) arrays of action
/// indices, execution order.
void save_policy_snapshot(const DecoupledPolicy& policy, std::uint64_t config_hash,
                          const std::string& path);
DecoupledPolicy load_policy_snapshot(const std::string& path, std::uint64_t* config_hash = nullptr);

}  // namespace ttvi
