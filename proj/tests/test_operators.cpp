#include <random>

#include "doctest.h"
#include "support/dense_reference.hpp"
#include "support/fixtures.hpp"
#include "ttvi/operators.hpp"

using namespace ttvi;
using namespace ttvi::testing;

TEST_CASE("masked expectation on the two-state chain") {
  SubsystemMdp mdp = chain_mdp();
  PolicySlice slice = constant_slice(2);
  Vec guard{1.0, 0.0};
  SubsystemOperatorInput op{&mdp, &guard, &slice};
  Vec out = apply_subsystem(op, {1.0, 1.0});
  CHECK(out[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("all-ones guard recovers the row sums, all-zero guard annihilates") {
  SubsystemMdp mdp = chain_mdp();
  PolicySlice slice = constant_slice(2);
  Vec ones_guard{1.0, 1.0};
  SubsystemOperatorInput op{&mdp, &ones_guard, &slice};
  Vec out = apply_subsystem(op, {1.0, 1.0});
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));

  Vec zero_guard{0.0, 0.0};
  SubsystemOperatorInput op0{&mdp, &zero_guard, &slice};
  Vec out0 = apply_subsystem(op0, {1.0, 1.0});
  CHECK(out0 == Vec{0.0, 0.0});
}

TEST_CASE("factor-wise application keeps rank one") {
  ReachChain rc = reach_pair();
  GatheredMatrix g0 = gather_rows(rc.mdps[0], constant_slice(2));
  GatheredMatrix g1 = gather_rows(rc.mdps[1], constant_slice(2));
  // guard: both propositions required true
  Conjunction conj;
  conj.req = {Conjunction::kTrue, Conjunction::kTrue};
  std::vector<Vec> parts = conjunction_indicators(conj, rc.labeling, rc.mdps);
  RankOneTensor out = apply_conjunction({&g0, &g1}, parts, ones_tensor({2, 2}));
  CHECK(out.factors[0][0] == doctest::Approx(0.7));
  CHECK(out.factors[0][1] == doctest::Approx(0.4));
  CHECK(out.factors[1][0] == doctest::Approx(0.7));
  CHECK(out.factors[1][1] == doctest::Approx(0.4));

  // free second part leaves an all-ones factor on an all-ones input
  Conjunction free2;
  free2.req = {Conjunction::kTrue, Conjunction::kFree};
  std::vector<Vec> parts2 = conjunction_indicators(free2, rc.labeling, rc.mdps);
  CHECK(parts2[1] == Vec{1.0, 1.0});
  RankOneTensor out2 = apply_conjunction({&g0, &g1}, parts2, ones_tensor({2, 2}));
  CHECK(out2.factors[1][0] == doctest::Approx(1.0));
  CHECK(out2.factors[1][1] == doctest::Approx(1.0));

  // a zero input factor stays zero
  RankOneTensor zero_in{{Vec{1.0, 1.0}, Vec{0.0, 0.0}}};
  RankOneTensor out3 = apply_conjunction({&g0, &g1}, parts, zero_in);
  CHECK(out3.factors[1] == Vec{0.0, 0.0});
}

TEST_CASE("Q-value columns for the two-action chain") {
  SubsystemMdp mdp = chain_mdp(true);
  Vec guard{1.0, 0.0};
  Vec q = apply_expectation_qvalues(mdp, guard, {1.0, 1.0});
  // row-major n_states x n_actions
  CHECK(q[0 * 2 + 0] == doctest::Approx(0.7));
  CHECK(q[1 * 2 + 0] == doctest::Approx(0.4));
  CHECK(q[0 * 2 + 1] == doctest::Approx(0.2));
  CHECK(q[1 * 2 + 1] == doctest::Approx(0.9));

  Vec z = apply_expectation_qvalues(mdp, guard, {0.0, 0.0});
  for (double x : z) CHECK(x == 0.0);

  Vec all{1.0, 1.0};
  Vec full = apply_expectation_qvalues(mdp, all, {1.0, 1.0});
  for (double x : full) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dimension mismatches throw") {
  SubsystemMdp mdp = chain_mdp();
  PolicySlice slice = constant_slice(2);
  Vec guard{1.0, 0.0};
  SubsystemOperatorInput op{&mdp, &guard, &slice};
  CHECK_THROWS_AS(apply_subsystem(op, {1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_expectation_qvalues(mdp, guard, {1.0}), std::invalid_argument);
}

namespace {

SubsystemMdp random_mdp(std::mt19937_64& rng, std::size_t n, std::size_t actions) {
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  SubsystemMdp mdp;
  mdp.n_states = n;
  mdp.n_actions = actions;
  mdp.sink_index = npos;
  for (std::size_t a = 0; a < actions; ++a) {
    Vec mat(n * n);
    for (std::size_t s = 0; s < n; ++s) {
      double sum = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        mat[s * n + t] = unit(rng);
        sum += mat[s * n + t];
      }
      for (std::size_t t = 0; t < n; ++t) mat[s * n + t] /= sum;
    }
    mdp.transition.push_back(std::move(mat));
  }
  return mdp;
}

}  // namespace

TEST_CASE("rank-1 application equals the dense joint operator") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t m = 1 + rep % 3;
    std::vector<SubsystemMdp> mdps;
    std::vector<PolicySlice> slices;
    std::vector<Vec> guards;
    std::vector<const GatheredMatrix*> rows;
    std::vector<GatheredMatrix> gathered;
    RankOneTensor input;
    std::vector<std::size_t> shape;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t n = 2 + static_cast<std::size_t>(unit(rng) * 4.9);
      mdps.push_back(random_mdp(rng, n, 2));
      PolicySlice slice;
      for (std::size_t s = 0; s < n; ++s)
        slice.action.push_back(static_cast<std::uint32_t>(coin(rng)));
      slices.push_back(slice);
      Vec guard(n);
      for (auto& x : guard) x = coin(rng);
      guards.push_back(guard);
      Vec factor(n);
      for (auto& x : factor) x = unit(rng);
      input.factors.push_back(factor);
      shape.push_back(n);
    }
    gathered.reserve(m);
    for (std::size_t i = 0; i < m; ++i) gathered.push_back(gather_rows(mdps[i], slices[i]));
    for (std::size_t i = 0; i < m; ++i) rows.push_back(&gathered[i]);

    RankOneTensor out = apply_conjunction(rows, guards, input);
    DenseTensor lhs = reconstruct(out);
    DenseTensor rhs = dense_apply(mdps, slices, guards, reconstruct(input));
    for (std::size_t s = 0; s < lhs.size(); ++s)
      CHECK(std::abs(lhs.data[s] - rhs.data[s]) <= 1e-12);
  }
}

TEST_CASE("monotone and contractive into the unit interval") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 30; ++rep) {
    std::size_t n = 3 + static_cast<std::size_t>(unit(rng) * 3);
    SubsystemMdp mdp = random_mdp(rng, n, 1);
    PolicySlice slice = constant_slice(n);
    Vec guard(n);
    for (auto& x : guard) x = coin(rng);
    Vec v(n), w(n);
    for (std::size_t s = 0; s < n; ++s) {
      v[s] = unit(rng);
      w[s] = v[s] + (1.0 - v[s]) * unit(rng);  // v <= w <= 1
    }
    SubsystemOperatorInput op{&mdp, &guard, &slice};
    Vec tv = apply_subsystem(op, v);
    Vec tw = apply_subsystem(op, w);
    for (std::size_t s = 0; s < n; ++s) {
      CHECK(tv[s] <= tw[s] + 1e-15);
      CHECK(tv[s] >= 0.0);
      CHECK(tw[s] <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("disjoint guards at a state partition the all-ones expectation") {
  ReachChain rc = reach_pair();
  std::vector<GatheredMatrix> gathered;
  for (const auto& mdp : rc.mdps) gathered.push_back(gather_rows(mdp, constant_slice(2)));
  std::vector<const GatheredMatrix*> rows{&gathered[0], &gathered[1]};
  DenseTensor total{{2, 2}, Vec(4, 0.0)};
  for (const auto& edge : rc.outgoing.at[rc.dfa.initial]) {
    std::vector<Vec> parts = conjunction_indicators(edge.guard, rc.labeling, rc.mdps);
    RankOneTensor term = apply_conjunction(rows, parts, ones_tensor({2, 2}));
    DenseTensor d = reconstruct(term);
    for (std::size_t s = 0; s < 4; ++s) total.data[s] += d.data[s];
  }
  for (double x : total.data) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}
