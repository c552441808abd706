#include "ttvi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ttvi {

void JointSpace::decompose_state(std::size_t s, std::vector<std::size_t>& out) const {
  out.resize(state_sizes.size());
  for (std::size_t i = state_sizes.size(); i-- > 0;) {
    out[i] = s % state_sizes[i];
    s /= state_sizes[i];
  }
}

void JointSpace::decompose_action(std::size_t a, std::vector<std::size_t>& out) const {
  out.resize(action_sizes.size());
  for (std::size_t i = action_sizes.size(); i-- > 0;) {
    out[i] = a % action_sizes[i];
    a /= action_sizes[i];
  }
}

std::size_t JointSpace::compose_state(std::span<const std::size_t> idx) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < state_sizes.size(); ++i) s = s * state_sizes[i] + idx[i];
  return s;
}

std::size_t JointSpace::compose_action(std::span<const std::size_t> idx) const {
  std::size_t a = 0;
  for (std::size_t i = 0; i < action_sizes.size(); ++i) a = a * action_sizes[i] + idx[i];
  return a;
}

JointSpace build_joint_space(const std::vector<SubsystemMdp>& mdps, const Labeling& labeling,
                             const Dfa& dfa, std::size_t dense_cap) {
  JointSpace space;
  space.n_modes = dfa.n_states;
  for (const auto& mdp : mdps) {
    space.state_sizes.push_back(mdp.n_states);
    space.action_sizes.push_back(mdp.n_actions);
    if (space.n_states > dense_cap / mdp.n_states)
      throw std::invalid_argument("joint state space exceeds the dense cap");
    space.n_states *= mdp.n_states;
    space.n_actions *= mdp.n_actions;
  }
  if (space.n_states * space.n_modes > dense_cap)
    throw std::invalid_argument("joint states times modes (" +
                                std::to_string(space.n_states * space.n_modes) +
                                ") exceeds the dense cap of " + std::to_string(dense_cap));
  space.letters.resize(space.n_states);
  std::vector<std::size_t> idx(mdps.size(), 0);
  for (std::size_t s = 0; s < space.n_states; ++s) {
    space.letters[s] = labeling.letter(idx);
    for (std::size_t i = mdps.size(); i-- > 0;) {
      if (++idx[i] < space.state_sizes[i]) break;
      idx[i] = 0;
    }
  }
  return space;
}

JointPolicyFn as_joint_policy(const DecoupledPolicy& policy, const JointSpace& space) {
  return [&policy, &space](std::size_t s, std::size_t q, std::size_t t) -> std::size_t {
    const PolicyStepSlices& slices = policy.step(t);
    if (q >= slices.size() || !slices[q].has_value())
      throw std::invalid_argument("no policy slice for mode " + std::to_string(q));
    const ModeSlices& ms = *slices[q];
    std::vector<std::size_t> state_idx;
    space.decompose_state(s, state_idx);
    std::size_t a = 0;
    for (std::size_t i = 0; i < state_idx.size(); ++i)
      a = a * space.action_sizes[i] + ms.per_subsystem[i].action[state_idx[i]];
    return a;
  };
}

namespace {

DenseValueField initial_field(const JointSpace& space, const Dfa& dfa) {
  DenseValueField f;
  f.per_mode.assign(space.n_modes, Vec(space.n_states, 0.0));
  f.per_mode[dfa.accepting].assign(space.n_states, 1.0);
  return f;
}

// Probability of one joint transition as the product of subsystem rows.
double joint_prob(const std::vector<SubsystemMdp>& mdps, std::span<const std::size_t> from,
                  std::span<const std::size_t> act, std::span<const std::size_t> to) {
  double p = 1.0;
  for (std::size_t i = 0; i < mdps.size(); ++i) {
    p *= mdps[i].row(act[i], from[i])[to[i]];
    if (p == 0.0) return 0.0;
  }
  return p;
}

}  // namespace

std::vector<DenseValueField> dense_vi_fixed_policy_direct(const JointSpace& space,
                                                          const std::vector<SubsystemMdp>& mdps,
                                                          const Dfa& dfa,
                                                          const JointPolicyFn& policy,
                                                          std::size_t horizon) {
  std::vector<DenseValueField> history;
  history.push_back(initial_field(space, dfa));
  std::vector<std::size_t> from(mdps.size()), act(mdps.size()), to(mdps.size());
  for (std::size_t k = 0; k < horizon; ++k) {
    const DenseValueField& prev = history.back();
    DenseValueField next = initial_field(space, dfa);
    const std::size_t exec_t = horizon - 1 - k;
    for (std::size_t q = 0; q < space.n_modes; ++q) {
      if (q == dfa.accepting) continue;
      for (std::size_t s = 0; s < space.n_states; ++s) {
        space.decompose_state(s, from);
        space.decompose_action(policy(s, q, exec_t), act);
        double acc = 0.0;
        std::fill(to.begin(), to.end(), 0);
        for (std::size_t t = 0; t < space.n_states; ++t) {
          double p = joint_prob(mdps, from, act, to);
          if (p != 0.0) acc += p * prev.per_mode[dfa.step(q, space.letters[t])][t];
          for (std::size_t i = mdps.size(); i-- > 0;) {
            if (++to[i] < space.state_sizes[i]) break;
            to[i] = 0;
          }
        }
        next.per_mode[q][s] = acc;
      }
    }
    history.push_back(std::move(next));
  }
  return history;
}

OptimalViResult dense_vi_optimal_direct(const JointSpace& space,
                                        const std::vector<SubsystemMdp>& mdps, const Dfa& dfa,
                                        std::size_t horizon) {
  OptimalViResult result;
  result.history.push_back(initial_field(space, dfa));
  result.policy.action.assign(
      horizon, std::vector<std::vector<std::uint32_t>>(space.n_modes,
                                                       std::vector<std::uint32_t>(space.n_states, 0)));
  std::vector<std::size_t> from(mdps.size()), act(mdps.size()), to(mdps.size());
  for (std::size_t k = 0; k < horizon; ++k) {
    const DenseValueField& prev = result.history.back();
    DenseValueField next = initial_field(space, dfa);
    const std::size_t exec_t = horizon - 1 - k;
    for (std::size_t q = 0; q < space.n_modes; ++q) {
      if (q == dfa.accepting) continue;
      for (std::size_t s = 0; s < space.n_states; ++s) {
        space.decompose_state(s, from);
        double best = -1.0;
        std::uint32_t best_a = 0;
        for (std::size_t a = 0; a < space.n_actions; ++a) {
          space.decompose_action(a, act);
          double acc = 0.0;
          std::fill(to.begin(), to.end(), 0);
          for (std::size_t t = 0; t < space.n_states; ++t) {
            double p = joint_prob(mdps, from, act, to);
            if (p != 0.0) acc += p * prev.per_mode[dfa.step(q, space.letters[t])][t];
            for (std::size_t i = mdps.size(); i-- > 0;) {
              if (++to[i] < space.state_sizes[i]) break;
              to[i] = 0;
            }
          }
          if (acc > best) {
            best = acc;
            best_a = static_cast<std::uint32_t>(a);
          }
        }
        next.per_mode[q][s] = best;
        result.policy.action[exec_t][q][s] = best_a;
      }
    }
    result.history.push_back(std::move(next));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Factored route
// ---------------------------------------------------------------------------

namespace {

// y[o, s, r] = sum_t M[s, t] * x[o, t, r] over one tensor mode.
void contract_mode(const Vec& x, Vec& y, const double* M, std::size_t outer, std::size_t n,
                   std::size_t inner) {
#pragma omp parallel for collapse(2) schedule(static)
  for (long long ol = 0; ol < static_cast<long long>(outer); ++ol) {
    for (long long sl = 0; sl < static_cast<long long>(n); ++sl) {
      const auto o = static_cast<std::size_t>(ol);
      const auto s = static_cast<std::size_t>(sl);
      const double* row = M + s * n;
      double* dst = y.data() + (o * n + s) * inner;
      std::fill(dst, dst + inner, 0.0);
      const double* base = x.data() + o * n * inner;
      for (std::size_t t = 0; t < n; ++t) {
        const double m = row[t];
        if (m == 0.0) continue;
        const double* src = base + t * inner;
        for (std::size_t r = 0; r < inner; ++r) dst[r] += m * src[r];
      }
    }
  }
}

// Elementwise product with the outer product of per-subsystem indicators.
void mask_joint(const JointSpace& space, const Vec& v, const std::vector<Vec>& indicators,
                Vec& out) {
  out.resize(v.size());
  const std::size_t m = space.state_sizes.size();
  std::vector<std::size_t> idx(m, 0);
  for (std::size_t s = 0; s < v.size(); ++s) {
    double p = v[s];
    for (std::size_t i = 0; i < m && p != 0.0; ++i) p *= indicators[i][idx[i]];
    out[s] = p;
    for (std::size_t i = m; i-- > 0;) {
      if (++idx[i] < space.state_sizes[i]) break;
      idx[i] = 0;
    }
  }
}

struct FactoredSweep {
  const JointSpace& space;
  const std::vector<SubsystemMdp>& mdps;
  const Dfa& dfa;
  const OutgoingTransitions& outgoing;
  std::vector<std::vector<std::vector<Vec>>> guard_indicators;  // [q][edge][subsystem]
  std::vector<bool> live;

  FactoredSweep(const JointSpace& space_, const std::vector<SubsystemMdp>& mdps_, const Dfa& dfa_,
                const OutgoingTransitions& outgoing_, const Labeling& labeling)
      : space(space_), mdps(mdps_), dfa(dfa_), outgoing(outgoing_) {
    guard_indicators.resize(dfa.n_states);
    for (std::size_t q = 0; q < dfa.n_states; ++q)
      for (const auto& e : outgoing.at[q])
        guard_indicators[q].push_back(conjunction_indicators(e.guard, labeling, mdps));
    live = dfa.can_reach_accepting();
  }

  // acc += contraction of V_target masked by the guard, under per-subsystem
  // transition matrices chosen by `rows` (policy-gathered or a fixed action).
  void accumulate(const Vec& masked, const std::vector<const double*>& rows, Vec& acc, Vec& ping,
                  Vec& pong) const {
    const std::size_t m = space.state_sizes.size();
    const Vec* cur = &masked;
    Vec* buffers[2] = {&ping, &pong};
    std::size_t outer = 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t n = space.state_sizes[i];
      std::size_t inner = space.n_states / (outer * n);
      Vec* dst = buffers[i % 2];
      dst->resize(space.n_states);
      contract_mode(*cur, *dst, rows[i], outer, n, inner);
      cur = dst;
      outer *= n;
    }
    const Vec& final_v = *cur;
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < static_cast<long long>(space.n_states); ++s)
      acc[static_cast<std::size_t>(s)] += final_v[static_cast<std::size_t>(s)];
  }
};

}  // namespace

std::vector<DenseValueField> dense_vi_fixed_policy(const JointSpace& space,
                                                   const std::vector<SubsystemMdp>& mdps,
                                                   const Dfa& dfa,
                                                   const OutgoingTransitions& outgoing,
                                                   const Labeling& labeling,
                                                   const DecoupledPolicy& policy,
                                                   std::size_t horizon) {
  FactoredSweep sweep(space, mdps, dfa, outgoing, labeling);
  std::vector<DenseValueField> history;
  history.push_back(initial_field(space, dfa));
  std::vector<bool> is_zero(space.n_modes, true);
  is_zero[dfa.accepting] = false;

  Vec masked, ping, pong;
  for (std::size_t k = 0; k < horizon; ++k) {
    const DenseValueField& prev = history.back();
    DenseValueField next = initial_field(space, dfa);
    std::vector<bool> next_zero(space.n_modes, true);
    next_zero[dfa.accepting] = false;
    const PolicyStepSlices& slices = policy.step(horizon - 1 - k);
    for (std::size_t q = 0; q < space.n_modes; ++q) {
      if (q == dfa.accepting || !sweep.live[q]) continue;
      bool any = false;
      for (const auto& e : outgoing.at[q])
        if (!is_zero[e.target]) any = true;
      if (!any) continue;
      if (q >= slices.size() || !slices[q].has_value())
        throw std::invalid_argument("no policy slice for live mode " + std::to_string(q));
      std::vector<GatheredMatrix> gathered;
      gathered.reserve(mdps.size());
      for (std::size_t i = 0; i < mdps.size(); ++i)
        gathered.push_back(gather_rows(mdps[i], slices[q]->per_subsystem[i]));
      std::vector<const double*> rows(mdps.size());
      for (std::size_t i = 0; i < mdps.size(); ++i) rows[i] = gathered[i].data.data();
      Vec& acc = next.per_mode[q];
      for (std::size_t e = 0; e < outgoing.at[q].size(); ++e) {
        const auto& edge = outgoing.at[q][e];
        if (is_zero[edge.target]) continue;
        mask_joint(space, prev.per_mode[edge.target], sweep.guard_indicators[q][e], masked);
        sweep.accumulate(masked, rows, acc, ping, pong);
      }
      next_zero[q] = false;
    }
    is_zero = std::move(next_zero);
    history.push_back(std::move(next));
  }
  return history;
}

namespace {

void optimal_step(const FactoredSweep& sweep, const DenseValueField& prev,
                  const std::vector<bool>& is_zero, DenseValueField& next,
                  std::vector<bool>& next_zero, std::vector<std::vector<std::uint32_t>>* argmax) {
  const JointSpace& space = sweep.space;
  const Dfa& dfa = sweep.dfa;
  const std::size_t m = sweep.mdps.size();
  Vec masked, ping, pong;
  std::vector<std::size_t> act(m);
  for (std::size_t q = 0; q < space.n_modes; ++q) {
    if (q == dfa.accepting || !sweep.live[q]) continue;
    std::vector<Vec> masked_targets(sweep.outgoing.at[q].size());
    bool any = false;
    for (std::size_t e = 0; e < sweep.outgoing.at[q].size(); ++e) {
      const auto& edge = sweep.outgoing.at[q][e];
      if (is_zero[edge.target]) continue;
      mask_joint(space, prev.per_mode[edge.target], sweep.guard_indicators[q][e],
                 masked_targets[e]);
      any = true;
    }
    if (!any) continue;
    Vec& best = next.per_mode[q];
    std::fill(best.begin(), best.end(), -1.0);
    std::vector<std::uint32_t>* arg = argmax != nullptr ? &(*argmax)[q] : nullptr;
    Vec acc(space.n_states);
    for (std::size_t a = 0; a < space.n_actions; ++a) {
      space.decompose_action(a, act);
      std::vector<const double*> rows(m);
      for (std::size_t i = 0; i < m; ++i) rows[i] = sweep.mdps[i].transition[act[i]].data();
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t e = 0; e < sweep.outgoing.at[q].size(); ++e) {
        if (masked_targets[e].empty()) continue;
        sweep.accumulate(masked_targets[e], rows, acc, ping, pong);
      }
      for (std::size_t s = 0; s < space.n_states; ++s) {
        if (acc[s] > best[s]) {
          best[s] = acc[s];
          if (arg != nullptr) (*arg)[s] = static_cast<std::uint32_t>(a);
        }
      }
    }
    next_zero[q] = false;
  }
}

}  // namespace

OptimalViResult dense_vi_optimal(const JointSpace& space, const std::vector<SubsystemMdp>& mdps,
                                 const Dfa& dfa, const OutgoingTransitions& outgoing,
                                 const Labeling& labeling, std::size_t horizon) {
  FactoredSweep sweep(space, mdps, dfa, outgoing, labeling);
  OptimalViResult result;
  result.history.push_back(initial_field(space, dfa));
  result.policy.action.assign(
      horizon, std::vector<std::vector<std::uint32_t>>(space.n_modes,
                                                       std::vector<std::uint32_t>(space.n_states, 0)));
  std::vector<bool> is_zero(space.n_modes, true);
  is_zero[dfa.accepting] = false;
  for (std::size_t k = 0; k < horizon; ++k) {
    DenseValueField next = initial_field(space, dfa);
    std::vector<bool> next_zero(space.n_modes, true);
    next_zero[dfa.accepting] = false;
    optimal_step(sweep, result.history.back(), is_zero, next, next_zero,
                 &result.policy.action[horizon - 1 - k]);
    // Modes whose targets were all zero never ran; restore their zeros.
    for (std::size_t q = 0; q < space.n_modes; ++q)
      if (next_zero[q] && q != dfa.accepting) std::fill(next.per_mode[q].begin(),
                                                        next.per_mode[q].end(), 0.0);
    is_zero = std::move(next_zero);
    result.history.push_back(std::move(next));
  }
  return result;
}

InfiniteViResult dense_vi_infinite(const JointSpace& space, const std::vector<SubsystemMdp>& mdps,
                                   const Dfa& dfa, const OutgoingTransitions& outgoing,
                                   const Labeling& labeling, double tol, std::size_t iter_cap) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  FactoredSweep sweep(space, mdps, dfa, outgoing, labeling);
  InfiniteViResult result;
  DenseValueField value = initial_field(space, dfa);
  std::vector<bool> is_zero(space.n_modes, true);
  is_zero[dfa.accepting] = false;
  for (result.iterations = 0; result.iterations < iter_cap; ++result.iterations) {
    DenseValueField next = initial_field(space, dfa);
    std::vector<bool> next_zero(space.n_modes, true);
    next_zero[dfa.accepting] = false;
    optimal_step(sweep, value, is_zero, next, next_zero, nullptr);
    for (std::size_t q = 0; q < space.n_modes; ++q)
      if (next_zero[q] && q != dfa.accepting)
        std::fill(next.per_mode[q].begin(), next.per_mode[q].end(), 0.0);
    double change = 0.0;
    for (std::size_t q = 0; q < space.n_modes; ++q)
      for (std::size_t s = 0; s < space.n_states; ++s)
        change = std::max(change, std::abs(next.per_mode[q][s] - value.per_mode[q][s]));
    value = std::move(next);
    is_zero = std::move(next_zero);
    if (change < tol) {
      result.converged = true;
      ++result.iterations;
      break;
    }
  }
  result.value = std::move(value);
  return result;
}

double satisfaction_at(const JointSpace& space, const Dfa& dfa, const DenseValueField& field,
                       std::size_t joint_state) {
  std::size_t q0 = dfa.step(dfa.initial, space.letters[joint_state]);
  if (q0 == dfa.accepting) return 1.0;
  return field.per_mode[q0][joint_state];
}

}  // namespace ttvi
