#include "ttvi/policy.hpp"

#include <stdexcept>

namespace ttvi {

std::vector<std::vector<ProspectiveEdge>> prospective_edges(const ValueTree& tree,
                                                            const TreeOps& ops) {
  const std::size_t n_modes = ops.dfa->n_states;
  std::vector<std::vector<std::size_t>> by_mode(n_modes);
  for (const auto& v : tree.vertices)
    if (v.alive) by_mode[v.mode].push_back(v.id);

  std::vector<std::vector<ProspectiveEdge>> edges(n_modes);
  for (std::size_t q = 0; q < n_modes; ++q) {
    if (q == ops.dfa->accepting) continue;
    for (std::size_t e = 0; e < ops.outgoing->at[q].size(); ++e)
      for (std::size_t id : by_mode[ops.outgoing->at[q][e].target])
        edges[q].push_back({id, e});
  }
  return edges;
}

namespace {

Vec column_sums(const GatheredMatrix& g) {
  Vec cs(g.n, 0.0);
  for (std::size_t s = 0; s < g.n; ++s) {
    const double* row = g.row(s);
    for (std::size_t t = 0; t < g.n; ++t) cs[t] += row[t];
  }
  return cs;
}

}  // namespace

PolicySlice optimize_mode_subsystem(std::size_t q, std::size_t subsystem, const ValueTree& tree,
                                    const TreeOps& ops,
                                    const std::vector<ProspectiveEdge>& edges,
                                    const ModeSlices& current) {
  if (edges.empty()) throw std::invalid_argument("mode has no edges to optimize against");
  const std::vector<SubsystemMdp>& mdps = *ops.mdps;
  const std::size_t m = mdps.size();
  const SubsystemMdp& mdp = mdps[subsystem];

  // Column sums of the other subsystems' policy-selected rows; the l1 norm of
  // a masked expectation is then a dot product per edge.
  std::vector<Vec> colsum(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == subsystem) continue;
    colsum[j] = column_sums(gather_rows(mdps[j], current.per_subsystem[j]));
  }

  // Q-values are linear in the parent factor, so edges sharing a guard are
  // folded into one weighted factor before the expectation.
  std::vector<Vec> weighted(ops.outgoing->at[q].size());
  for (const auto& e : edges) {
    const auto& guard_ind = ops.guard_indicators[q][e.guard_index];
    const RankOneTensor& parent = tree.vertices[e.parent_vertex].value;
    double c = 1.0;
    for (std::size_t j = 0; j < m && c != 0.0; ++j) {
      if (j == subsystem) continue;
      double dot = 0.0;
      const Vec& ind = guard_ind[j];
      const Vec& pf = parent.factors[j];
      for (std::size_t s = 0; s < colsum[j].size(); ++s) dot += colsum[j][s] * ind[s] * pf[s];
      c *= dot;
    }
    if (c == 0.0) continue;
    Vec& w = weighted[e.guard_index];
    if (w.empty()) w.assign(mdp.n_states, 0.0);
    const Vec& pf = parent.factors[subsystem];
    for (std::size_t s = 0; s < mdp.n_states; ++s) w[s] += c * pf[s];
  }

  Vec score(mdp.n_states * mdp.n_actions, 0.0);
  for (std::size_t g = 0; g < weighted.size(); ++g) {
    if (weighted[g].empty()) continue;
    Vec qv = apply_expectation_qvalues(mdp, ops.guard_indicators[q][g][subsystem], weighted[g]);
    for (std::size_t i = 0; i < score.size(); ++i) score[i] += qv[i];
  }

  PolicySlice slice;
  slice.action.resize(mdp.n_states, 0);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    const double* row = score.data() + s * mdp.n_actions;
    std::uint32_t best = 0;
    for (std::size_t a = 1; a < mdp.n_actions; ++a)
      if (row[a] > row[best]) best = static_cast<std::uint32_t>(a);
    slice.action[s] = best;
  }
  return slice;
}

PolicyStepSlices optimize_step(const ValueTree& tree, const TreeOps& ops,
                               const PolicyStepSlices& prev, std::size_t passes) {
  const std::size_t n_modes = ops.dfa->n_states;
  const std::vector<SubsystemMdp>& mdps = *ops.mdps;
  auto edges = prospective_edges(tree, ops);

  PolicyStepSlices slices(n_modes);
  for (std::size_t q = 0; q < n_modes; ++q) {
    if (q == ops.dfa->accepting || edges[q].empty()) continue;
    ModeSlices ms;
    if (q < prev.size() && prev[q].has_value()) {
      ms = *prev[q];
    } else {
      ms.per_subsystem.resize(mdps.size());
      for (std::size_t i = 0; i < mdps.size(); ++i)
        ms.per_subsystem[i].action.assign(mdps[i].n_states, 0);
    }
    for (std::size_t pass = 0; pass < passes; ++pass)
      for (std::size_t i = 0; i < mdps.size(); ++i)
        ms.per_subsystem[i] = optimize_mode_subsystem(q, i, tree, ops, edges[q], ms);
    slices[q] = std::move(ms);
  }
  return slices;
}

JointPolicy exact_optimal_policy(const JointSpace& space, const std::vector<SubsystemMdp>& mdps,
                                 const Dfa& dfa, const OutgoingTransitions& outgoing,
                                 const Labeling& labeling, std::size_t horizon) {
  return dense_vi_optimal(space, mdps, dfa, outgoing, labeling, horizon).policy;
}

}  // namespace ttvi
