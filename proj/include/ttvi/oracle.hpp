#pragma once

#include <functional>

#include "ttvi/decoupled_policy.hpp"

namespace ttvi {

/// Materialized product state space: joint states in row-major order over the
/// subsystem state indices, joint actions likewise over the action grids, and
/// the letter of every joint state. Construction fails when joint states times
/// DFA modes would exceed the dense cap.
struct JointSpace {
  std::vector<std::size_t> state_sizes;
  std::vector<std::size_t> action_sizes;
  std::size_t n_states = 1;
  std::size_t n_actions = 1;
  std::size_t n_modes = 0;
  std::vector<Letter> letters;

  void decompose_state(std::size_t s, std::vector<std::size_t>& out) const;
  void decompose_action(std::size_t a, std::vector<std::size_t>& out) const;
  std::size_t compose_state(std::span<const std::size_t> idx) const;
  std::size_t compose_action(std::span<const std::size_t> idx) const;
};

JointSpace build_joint_space(const std::vector<SubsystemMdp>& mdps, const Labeling& labeling,
                             const Dfa& dfa, std::size_t dense_cap = kDefaultDenseCap);

/// One dense value vector per DFA mode.
struct DenseValueField {
  std::vector<Vec> per_mode;
};

/// Joint-action policy, per execution step and mode.
struct JointPolicy {
  std::vector<std::vector<std::vector<std::uint32_t>>> action;  // [t][q][s]
};

using JointPolicyFn =
    std::function<std::size_t(std::size_t state, std::size_t mode, std::size_t exec_time)>;

JointPolicyFn as_joint_policy(const DecoupledPolicy& policy, const JointSpace& space);

/// Reference sweep over the raw product recursion: the expectation runs over
/// every joint successor with the transition probability formed as the product
/// of subsystem rows and the mode advanced through the successor's letter.
/// Deliberately serial and unfactored; returns the value history V_0..V_N.
std::vector<DenseValueField> dense_vi_fixed_policy_direct(const JointSpace& space,
                                                          const std::vector<SubsystemMdp>& mdps,
                                                          const Dfa& dfa,
                                                          const JointPolicyFn& policy,
                                                          std::size_t horizon);

struct OptimalViResult {
  std::vector<DenseValueField> history;
  JointPolicy policy;
};

/// Reference optimal sweep (argmax over joint actions, ties to the smallest
/// index); serial, unfactored.
OptimalViResult dense_vi_optimal_direct(const JointSpace& space,
                                        const std::vector<SubsystemMdp>& mdps, const Dfa& dfa,
                                        std::size_t horizon);

/// Factored sweep: per mode, the update sums one masked Kronecker
/// contraction per outgoing guard conjunction. Same values as the direct
/// route, but one mode-wise matrix contraction per subsystem instead of a
/// joint-kernel sweep; inner loops run under OpenMP.
std::vector<DenseValueField> dense_vi_fixed_policy(const JointSpace& space,
                                                   const std::vector<SubsystemMdp>& mdps,
                                                   const Dfa& dfa,
                                                   const OutgoingTransitions& outgoing,
                                                   const Labeling& labeling,
                                                   const DecoupledPolicy& policy,
                                                   std::size_t horizon);

OptimalViResult dense_vi_optimal(const JointSpace& space, const std::vector<SubsystemMdp>& mdps,
                                 const Dfa& dfa, const OutgoingTransitions& outgoing,
                                 const Labeling& labeling, std::size_t horizon);

struct InfiniteViResult {
  DenseValueField value;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Optimal sweeps iterated until the sup-norm step change drops below tol or
/// the iteration cap is hit; either way the result is a valid lower bound of
/// the limit (values are monotone nondecreasing).
InfiniteViResult dense_vi_infinite(const JointSpace& space, const std::vector<SubsystemMdp>& mdps,
                                   const Dfa& dfa, const OutgoingTransitions& outgoing,
                                   const Labeling& labeling, double tol, std::size_t iter_cap);

/// Satisfaction probability read off a value field: the initial letter moves
/// the automaton first, and landing on the accepting mode means probability 1.
double satisfaction_at(const JointSpace& space, const Dfa& dfa, const DenseValueField& field,
                       std::size_t joint_state);

}  // namespace ttvi
