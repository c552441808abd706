#pragma once

#include "ttvi/grid.hpp"
#include "ttvi/scltl.hpp"
#include "ttvi/tensor.hpp"

namespace ttvi {

/// One subsystem's state->action map for a single DFA mode and time step.
struct PolicySlice {
  std::vector<std::uint32_t> action;  // per state
};

/// Transition rows selected by a policy slice: row s of the matrix is the
/// row of T[slice(s)] at s. Built once per (mode, subsystem, step) and shared
/// across every edge into that mode.
struct GatheredMatrix {
  std::size_t n = 0;
  Vec data;  // row-major n*n

  const double* row(std::size_t s) const { return data.data() + s * n; }
};

GatheredMatrix gather_rows(const SubsystemMdp& mdp, const PolicySlice& slice);

struct SubsystemOperatorInput {
  const SubsystemMdp* mdp = nullptr;
  const Vec* guard_indicator = nullptr;  // per state of *mdp
  const PolicySlice* policy = nullptr;
};

/// result(s) = sum_{s'} T(s'|s, policy(s)) * indicator(s') * v(s').
/// Values stay in [0,1] for inputs in [0,1]; a violation beyond 1e-9 means an
/// internal inconsistency and throws instead of clamping.
Vec apply_subsystem(const SubsystemOperatorInput& op, const Vec& v);
Vec apply_subsystem(const GatheredMatrix& rows, const Vec& guard_indicator, const Vec& v);

/// Per-subsystem indicator vectors of one conjunction guard: required-true APs
/// multiply in their indicators, required-false APs their complements, and a
/// subsystem with no constrained APs gets all-ones.
std::vector<Vec> conjunction_indicators(const Conjunction& conj, const Labeling& labeling,
                                        const std::vector<SubsystemMdp>& mdps);

/// Factor-wise application: factor i of the output is apply_subsystem on
/// factor i, so rank-1 inputs map to rank-1 outputs.
RankOneTensor apply_conjunction(const std::vector<const GatheredMatrix*>& rows,
                                const std::vector<Vec>& guard_indicators,
                                const RankOneTensor& v);

/// Q(s,a) = sum_{s'} T(s'|s,a) * indicator(s') * v(s'), returned row-major
/// n_states x n_actions.
Vec apply_expectation_qvalues(const SubsystemMdp& mdp, const Vec& guard_indicator, const Vec& v);

}  // namespace ttvi
