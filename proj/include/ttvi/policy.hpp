#pragma once

#include "ttvi/oracle.hpp"
#include "ttvi/tree.hpp"

namespace ttvi {

/// An edge the next growth step will materialize into mode q: a current
/// vertex labeled by the guard's target together with that guard.
struct ProspectiveEdge {
  std::size_t parent_vertex = 0;
  std::size_t guard_index = 0;
};

std::vector<std::vector<ProspectiveEdge>> prospective_edges(const ValueTree& tree,
                                                            const TreeOps& ops);

/// Weighted per-subsystem argmax for one mode: each edge contributes its
/// parent-factor expectation Q-values under the edge guard, weighted by the
/// product of the other subsystems' masked-expectation l1 norms at their
/// current slices. Ties break toward the smallest action index.
PolicySlice optimize_mode_subsystem(std::size_t q, std::size_t subsystem, const ValueTree& tree,
                                    const TreeOps& ops,
                                    const std::vector<ProspectiveEdge>& edges,
                                    const ModeSlices& current);

/// Round-robin coordinate passes over the subsystems of every mode with a
/// nonempty prospective edge set. Slices start from prev (or action 0 at cold
/// start); passes == 0 returns the initialization unchanged. Edge weights are
/// recomputed from the latest other-subsystem slices each pass.
PolicyStepSlices optimize_step(const ValueTree& tree, const TreeOps& ops,
                               const PolicyStepSlices& prev, std::size_t passes);

/// Fully coupled optimal policy from the dense sweeps (argmax over joint
/// actions per state, mode and step; ties to the smallest joint index).
JointPolicy exact_optimal_policy(const JointSpace& space, const std::vector<SubsystemMdp>& mdps,
                                 const Dfa& dfa, const OutgoingTransitions& outgoing,
                                 const Labeling& labeling, std::size_t horizon);

}  // namespace ttvi
