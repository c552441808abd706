#pragma once

#include <vector>

#include "ttvi/pipeline.hpp"

namespace ttvi::testing {

// Two-state chain with rows [0.7,0.3] / [0.4,0.6]; the optional second action
// has rows [0.2,0.8] / [0.9,0.1]. No sink; "g" holds at state 0.
inline SubsystemMdp chain_mdp(bool two_actions = false) {
  SubsystemMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = two_actions ? 2 : 1;
  mdp.sink_index = npos;
  mdp.transition.push_back({0.7, 0.3, 0.4, 0.6});
  if (two_actions) mdp.transition.push_back({0.2, 0.8, 0.9, 0.1});
  mdp.cell_centers = {{0.0}, {1.0}};
  mdp.action_values.resize(mdp.n_actions);
  mdp.geometry.lo = {0.0};
  mdp.geometry.width = {1.0};
  mdp.geometry.cells = {2};
  return mdp;
}

struct ReachChain {
  std::vector<SubsystemMdp> mdps;
  Labeling labeling;
  Dfa dfa;
  OutgoingTransitions outgoing;
  std::vector<std::size_t> sizes;

  Instance as_instance(std::string spec_text) const {
    Instance inst;
    inst.mdps = mdps;
    inst.labeling = labeling;
    inst.dfa = dfa;
    inst.outgoing = outgoing;
    inst.sizes = sizes;
    inst.spec_text = std::move(spec_text);
    return inst;
  }
};

// Single chain subsystem with the reach specification for "g".
inline ReachChain reach_chain(bool two_actions = false) {
  ReachChain rc;
  rc.mdps = {chain_mdp(two_actions)};
  rc.labeling.ap_names = {"g"};
  rc.labeling.owner = {0};
  rc.labeling.indicators = {{1.0, 0.0}};
  rc.dfa = to_dfa(parse_formula("(g | !g) U g", rc.labeling.ap_names), rc.labeling.ap_names);
  rc.outgoing = factor_edges(rc.dfa);
  rc.sizes = {2};
  return rc;
}

// Two independent chains with the reach specification for g1 & g2; the
// self-loop factors into the disjoint conjunctions {!g1} and {g1, !g2}.
inline ReachChain reach_pair(bool two_actions = false) {
  ReachChain rc;
  rc.mdps = {chain_mdp(two_actions), chain_mdp(two_actions)};
  rc.labeling.ap_names = {"g1", "g2"};
  rc.labeling.owner = {0, 1};
  rc.labeling.indicators = {{1.0, 0.0}, {1.0, 0.0}};
  rc.dfa =
      to_dfa(parse_formula("(g1 | !g1) U (g1 & g2)", rc.labeling.ap_names), rc.labeling.ap_names);
  rc.outgoing = factor_edges(rc.dfa);
  rc.sizes = {2, 2};
  return rc;
}

inline PolicySlice constant_slice(std::size_t n_states, std::uint32_t action = 0) {
  PolicySlice s;
  s.action.assign(n_states, action);
  return s;
}

// Stationary policy assigning action 0 everywhere, for every non-accepting mode.
inline DecoupledPolicy zero_policy(const ReachChain& rc) {
  PolicyStepSlices slices(rc.dfa.n_states);
  for (std::size_t q = 0; q < rc.dfa.n_states; ++q) {
    if (q == rc.dfa.accepting) continue;
    ModeSlices ms;
    for (const auto& mdp : rc.mdps) ms.per_subsystem.push_back(constant_slice(mdp.n_states));
    slices[q] = std::move(ms);
  }
  DecoupledPolicy p;
  p.steps.push_back(std::move(slices));
  return p;
}

}  // namespace ttvi::testing
