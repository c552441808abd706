#include "ttvi/operators.hpp"

#include <stdexcept>

namespace ttvi {

namespace {

constexpr double kUnitSlack = 1e-9;

void check_unit_range(const Vec& v) {
  for (double x : v)
    if (x < -kUnitSlack || x > 1.0 + kUnitSlack)
      throw std::logic_error("operator output left [0,1]: " + std::to_string(x));
}

Vec masked(const Vec& indicator, const Vec& v) {
  Vec u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = indicator[i] * v[i];
  return u;
}

}  // namespace

GatheredMatrix gather_rows(const SubsystemMdp& mdp, const PolicySlice& slice) {
  if (slice.action.size() != mdp.n_states)
    throw std::invalid_argument("policy slice length mismatch");
  GatheredMatrix g;
  g.n = mdp.n_states;
  g.data.resize(g.n * g.n);
  for (std::size_t s = 0; s < g.n; ++s) {
    std::uint32_t a = slice.action[s];
    if (a >= mdp.n_actions) throw std::invalid_argument("policy action out of range");
    const double* src = mdp.row(a, s);
    std::copy(src, src + g.n, g.data.begin() + s * g.n);
  }
  return g;
}

Vec apply_subsystem(const GatheredMatrix& rows, const Vec& guard_indicator, const Vec& v) {
  if (v.size() != rows.n || guard_indicator.size() != rows.n)
    throw std::invalid_argument("apply_subsystem dimension mismatch");
  Vec u = masked(guard_indicator, v);
  Vec out(rows.n, 0.0);
  for (std::size_t s = 0; s < rows.n; ++s) {
    const double* r = rows.row(s);
    double acc = 0.0;
    for (std::size_t t = 0; t < rows.n; ++t) acc += r[t] * u[t];
    out[s] = acc;
  }
  check_unit_range(out);
  return out;
}

Vec apply_subsystem(const SubsystemOperatorInput& op, const Vec& v) {
  return apply_subsystem(gather_rows(*op.mdp, *op.policy), *op.guard_indicator, v);
}

std::vector<Vec> conjunction_indicators(const Conjunction& conj, const Labeling& labeling,
                                        const std::vector<SubsystemMdp>& mdps) {
  std::vector<Vec> parts;
  parts.reserve(mdps.size());
  for (const auto& mdp : mdps) parts.emplace_back(mdp.n_states, 1.0);
  for (std::size_t ap = 0; ap < labeling.n_aps(); ++ap) {
    if (conj.req[ap] == Conjunction::kFree) continue;
    Vec& part = parts[labeling.owner[ap]];
    const Vec& ind = labeling.indicators[ap];
    if (conj.req[ap] == Conjunction::kTrue)
      for (std::size_t s = 0; s < part.size(); ++s) part[s] *= ind[s];
    else
      for (std::size_t s = 0; s < part.size(); ++s) part[s] *= 1.0 - ind[s];
  }
  return parts;
}

RankOneTensor apply_conjunction(const std::vector<const GatheredMatrix*>& rows,
                                const std::vector<Vec>& guard_indicators,
                                const RankOneTensor& v) {
  if (rows.size() != v.order() || guard_indicators.size() != v.order())
    throw std::invalid_argument("apply_conjunction order mismatch");
  RankOneTensor out;
  out.factors.reserve(v.order());
  for (std::size_t i = 0; i < v.order(); ++i)
    out.factors.push_back(apply_subsystem(*rows[i], guard_indicators[i], v.factors[i]));
  return out;
}

Vec apply_expectation_qvalues(const SubsystemMdp& mdp, const Vec& guard_indicator, const Vec& v) {
  if (v.size() != mdp.n_states || guard_indicator.size() != mdp.n_states)
    throw std::invalid_argument("qvalues dimension mismatch");
  Vec u = masked(guard_indicator, v);
  Vec q(mdp.n_states * mdp.n_actions, 0.0);
#pragma omp parallel for schedule(static)
  for (long long sl = 0; sl < static_cast<long long>(mdp.n_states); ++sl) {
    const auto s = static_cast<std::size_t>(sl);
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const double* r = mdp.row(a, s);
      double acc = 0.0;
      for (std::size_t t = 0; t < mdp.n_states; ++t) acc += r[t] * u[t];
      q[s * mdp.n_actions + a] = acc;
    }
  }
  return q;
}

}  // namespace ttvi
