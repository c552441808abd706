#include "ttvi/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ttvi {

namespace {

// Cumulative transition rows per action, for inverse-CDF sampling.
struct CumulativeRows {
  std::size_t n = 0;
  std::vector<Vec> per_action;

  explicit CumulativeRows(const SubsystemMdp& mdp) : n(mdp.n_states) {
    per_action.reserve(mdp.n_actions);
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      Vec cum(n * n);
      for (std::size_t s = 0; s < n; ++s) {
        const double* row = mdp.row(a, s);
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          acc += row[t];
          cum[s * n + t] = acc;
        }
      }
      per_action.push_back(std::move(cum));
    }
  }

  std::size_t sample(std::size_t action, std::size_t state, double u) const {
    const double* row = per_action[action].data() + state * n;
    const double* it = std::lower_bound(row, row + n, u);
    std::size_t t = static_cast<std::size_t>(it - row);
    return t < n ? t : n - 1;
  }
};

}  // namespace

McResult simulate(const std::vector<SubsystemMdp>& mdps, const Dfa& dfa, const Labeling& labeling,
                  const DecoupledPolicy& policy, std::span<const std::size_t> initial_state,
                  std::size_t horizon, std::size_t episodes, std::uint64_t seed) {
  if (initial_state.size() != mdps.size())
    throw std::invalid_argument("initial state must give one index per subsystem");
  if (policy.empty() && horizon > 0)
    throw std::invalid_argument("simulation needs a policy for a positive horizon");
  const std::size_t m = mdps.size();
  std::vector<CumulativeRows> rows;
  rows.reserve(m);
  for (const auto& mdp : mdps) rows.emplace_back(mdp);
  const std::vector<bool> live = dfa.can_reach_accepting();

  const std::size_t q_start = dfa.step(dfa.initial, labeling.letter(initial_state));
  if (horizon > 0 && q_start != dfa.accepting && live[q_start]) {
    bool covered = false;
    for (const auto& step : policy.steps)
      if (q_start < step.size() && step[q_start].has_value()) covered = true;
    if (!covered)
      throw std::invalid_argument("no policy entry for start mode " + std::to_string(q_start));
  }

  std::size_t accepted = 0;
  std::uint64_t trace_hash = 0;
#pragma omp parallel reduction(+ : accepted) reduction(^ : trace_hash)
  {
    std::vector<std::size_t> state(m);
#pragma omp for schedule(static)
    for (long long epl = 0; epl < static_cast<long long>(episodes); ++epl) {
      const auto ep = static_cast<std::size_t>(epl);
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(ep)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::copy(initial_state.begin(), initial_state.end(), state.begin());
      std::size_t q = q_start;
      std::uint64_t h = fnv1a(&q, sizeof(q));
      bool ok = q == dfa.accepting;
      for (std::size_t t = 0; t < horizon && !ok && live[q]; ++t) {
        const PolicyStepSlices& slices = policy.step(t);
        // Mode-time pairs the synthesis never reached carry no slice; action 0
        // keeps the run total (the certified bound counts no such path, so any
        // completion leaves it a lower bound).
        const ModeSlices* ms =
            (q < slices.size() && slices[q].has_value()) ? &*slices[q] : nullptr;
        for (std::size_t i = 0; i < m; ++i) {
          std::size_t a = ms != nullptr ? ms->per_subsystem[i].action[state[i]] : 0;
          state[i] = rows[i].sample(a, state[i], unit(rng));
        }
        q = dfa.step(q, labeling.letter(state));
        h = fnv1a(state.data(), state.size() * sizeof(state[0]), h);
        h = fnv1a(&q, sizeof(q), h);
        ok = q == dfa.accepting;
      }
      if (ok) ++accepted;
      trace_hash ^= h;
    }
  }

  McResult r;
  r.episodes = episodes;
  r.accepted = accepted;
  r.trace_hash = trace_hash;
  const double n = static_cast<double>(episodes);
  r.frequency = episodes > 0 ? static_cast<double>(accepted) / n : 0.0;
  r.std_error = episodes > 0 ? std::sqrt(r.frequency * (1.0 - r.frequency) / n) : 0.0;
  if (episodes > 0) {
    const double z = 1.959963984540054;  // 95%
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (r.frequency + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(r.frequency * (1.0 - r.frequency) / n + z2 / (4.0 * n * n)) / denom;
    r.wilson_lo = std::max(0.0, center - half);
    r.wilson_hi = std::min(1.0, center + half);
  }
  return r;
}

}  // namespace ttvi
