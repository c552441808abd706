#pragma once

#include "ttvi/decoupled_policy.hpp"
#include "ttvi/scltl.hpp"

namespace ttvi {

struct McResult {
  std::size_t episodes = 0;
  std::size_t accepted = 0;
  double frequency = 0.0;
  double std_error = 0.0;  // binomial standard error at the observed frequency
  double wilson_lo = 0.0;  // 95% Wilson interval
  double wilson_hi = 0.0;
  std::uint64_t trace_hash = 0;  // order-independent fold of per-episode trace hashes
};

/// Simulate the controlled abstraction: each episode consumes the initial
/// letter, then for up to `horizon` steps samples every subsystem's successor
/// independently from its policy-selected row (inverse CDF on cached
/// cumulative rows) and advances the automaton by the new letter. Episodes
/// are independent with seeds derived from (seed, episode index), so results
/// are identical under any scheduling.
McResult simulate(const std::vector<SubsystemMdp>& mdps, const Dfa& dfa, const Labeling& labeling,
                  const DecoupledPolicy& policy, std::span<const std::size_t> initial_state,
                  std::size_t horizon, std::size_t episodes, std::uint64_t seed);

}  // namespace ttvi
