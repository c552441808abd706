#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"
#include "ttvi/pipeline.hpp"

using namespace ttvi;
using namespace ttvi::testing;

TEST_CASE("initial tree is a single accepting-mode vertex with the all-ones value") {
  ReachChain rc = reach_chain();
  ValueTree tree = init_tree(rc.sizes, rc.dfa);
  CHECK(tree.vertices.size() == 1);
  CHECK(tree.alive_count() == 1);
  CHECK(tree.frontier == std::vector<std::size_t>{0});

  CpdValue acc = reconstruct_value(tree, rc.dfa.accepting);
  REQUIRE(acc.rank() == 1);
  DenseTensor d = reconstruct(acc, {2});
  CHECK(d.data == Vec{1.0, 1.0});

  CpdValue other = reconstruct_value(tree, rc.dfa.initial);
  CHECK(other.rank() == 0);
  DenseTensor z = reconstruct(other, {2});
  CHECK(z.data == Vec{0.0, 0.0});
}

TEST_CASE("chain reach: first two growth steps match the hand recursion") {
  ReachChain rc = reach_chain();
  Instance inst = rc.as_instance("reach g");
  TreeOps ops = inst.make_ops();
  DecoupledPolicy policy = zero_policy(rc);

  SynthesisOutcome one = run_tree_vi(inst, ops, policy, 1, 0.0, {1});
  CHECK(one.tree.alive_count() == 2);
  CpdValue v1 = reconstruct_value(one.tree, rc.dfa.initial);
  REQUIRE(v1.rank() == 1);
  CHECK(v1.terms[0].factors[0][0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(v1.terms[0].factors[0][1] == doctest::Approx(0.4).epsilon(1e-15));

  SynthesisOutcome two = run_tree_vi(inst, ops, policy, 2, 0.0, {1});
  CHECK(two.tree.alive_count() == 3);
  CpdValue v2 = reconstruct_value(two.tree, rc.dfa.initial);
  REQUIRE(v2.rank() == 2);
  CHECK(v2.terms[1].factors[0][0] == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(v2.terms[1].factors[0][1] == doctest::Approx(0.24).epsilon(1e-12));
  DenseTensor d = reconstruct(v2, {2});
  CHECK(d.data[0] == doctest::Approx(0.82).epsilon(1e-12));
  CHECK(d.data[1] == doctest::Approx(0.64).epsilon(1e-12));
  // the bound at state 1 is the mode-q0 value there
  CHECK(two.lower_bound == doctest::Approx(0.64).epsilon(1e-12));
  validate_tree(two.tree, ops);
}

TEST_CASE("pair reach: term counts follow the doubling-plus-one recursion exactly") {
  ReachChain rc = reach_pair();
  Instance inst = rc.as_instance("reach g1 & g2");
  TreeOps ops = inst.make_ops();
  DecoupledPolicy policy = zero_policy(rc);

  SynthesisOutcome run = run_tree_vi(inst, ops, policy, 4, 0.0, {1, 1});
  std::vector<std::size_t> expected{0, 1, 3, 7, 15};  // R_{k+1} = 1 + 2 R_k
  for (std::size_t k = 0; k <= 4; ++k)
    CHECK(run.obs_per_step[k][rc.dfa.initial] == expected[k]);

  RankLedger ledger = build_rank_ledger(run.obs_per_step, rc.dfa, rc.outgoing);
  CHECK(ledger.all_within_bound());
  for (const auto& e : ledger.entries)
    if (e.q == rc.dfa.initial) CHECK(e.r_obs == e.r_bound);  // unpruned growth meets the bound
  validate_tree(run.tree, ops);
}

TEST_CASE("every vertex densifies to its factor outer product after growth") {
  ReachChain rc = reach_pair();
  Instance inst = rc.as_instance("reach");
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_tree_vi(inst, ops, zero_policy(rc), 3, 0.0, {1, 1});
  for (const auto& v : run.tree.vertices) {
    if (!v.alive) continue;
    DenseTensor d = reconstruct(v.value);
    std::vector<std::size_t> idx(2, 0);
    for (std::size_t s = 0; s < d.size(); ++s) {
      idx[0] = s / 2;
      idx[1] = s % 2;
      CHECK(std::abs(d.data[s] - v.value.value_at(idx)) <= 1e-15);
    }
  }
}

TEST_CASE("prune with zero threshold is the identity") {
  ReachChain rc = reach_chain();
  Instance inst = rc.as_instance("reach g");
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_tree_vi(inst, ops, zero_policy(rc), 3, 0.0, {1});
  ValueTree tree = run.tree;
  CHECK(prune(tree, PruneConfig{0.0}) == 0);
  CHECK(tree.alive_count() == run.tree.alive_count());
}

TEST_CASE("a leaf below the threshold is removed by max-norm") {
  ReachChain rc = reach_pair();
  ValueTree tree = init_tree(rc.sizes, rc.dfa);
  TreeVertex leaf;
  leaf.id = 1;
  leaf.parent = 0;
  leaf.mode = rc.dfa.initial;
  leaf.guard_index = 0;
  leaf.value = RankOneTensor{{{0.5, 0.3}, {0.6, 0.2}}};  // max 0.30
  tree.vertices.push_back(leaf);
  ++tree.vertices[0].children_alive;
  tree.frontier = {1};
  CHECK(prune(tree, PruneConfig{0.5}) == 1);
  CHECK(tree.alive_count() == 1);
  CHECK(tree.frontier.empty());
  CHECK(prune(tree, PruneConfig{0.5}) == 0);  // root never removed
}

TEST_CASE("threshold one eventually removes every non-root vertex") {
  ReachChain rc = reach_chain();
  Instance inst = rc.as_instance("reach g");
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_tree_vi(inst, ops, zero_policy(rc), 6, 1.0, {1});
  CHECK(run.tree.alive_count() == 1);  // only the root survives
  CHECK(run.tree.frontier.empty());
  CHECK(run.lower_bound == 0.0);
}

TEST_CASE("rank ledger on the chain grows linearly and matches the bound") {
  ReachChain rc = reach_chain();
  Instance inst = rc.as_instance("reach g");
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_tree_vi(inst, ops, zero_policy(rc), 5, 0.0, {1});
  RankLedger ledger = build_rank_ledger(run.obs_per_step, rc.dfa, rc.outgoing);
  for (const auto& e : ledger.entries) {
    if (e.q == rc.dfa.initial) {
      CHECK(e.r_obs == e.k);
      CHECK(e.r_bound == e.k);
    }
    if (e.q == rc.dfa.accepting) CHECK(e.r_bound == 1);
  }
  CHECK(ledger.all_within_bound());
}

TEST_CASE("dead modes keep a zero rank bound") {
  Dfa dfa = to_dfa(parse_formula("p1", {"p1"}), {"p1"});
  OutgoingTransitions out = factor_edges(dfa);
  std::vector<std::vector<std::size_t>> obs(3, std::vector<std::size_t>(dfa.n_states, 0));
  RankLedger ledger = build_rank_ledger(obs, dfa, out);
  std::size_t sink = dfa.step(dfa.initial, 0);
  for (const auto& e : ledger.entries)
    if (e.q == sink) CHECK(e.r_bound == 0);
}

TEST_CASE("unpruned tree equals the direct dense sweep on random instances") {
  std::mt19937_64 rng(5150);
  for (int rep = 0; rep < 6; ++rep) {
    RandomInstanceOptions opt;
    opt.horizon = 6;
    RunConfig cfg = random_instance(rng, opt);
    Instance inst = build_instance(cfg);
    TreeOps ops = inst.make_ops();
    DecoupledPolicy policy = random_stationary_policy(rng, inst);
    JointSpace space = build_joint_space(inst.mdps, inst.labeling, inst.dfa);
    auto dense =
        dense_vi_fixed_policy_direct(space, inst.mdps, inst.dfa, as_joint_policy(policy, space),
                                     cfg.horizon);
    for (std::size_t k = 0; k <= cfg.horizon; ++k) {
      SynthesisOutcome run =
          run_tree_vi(inst, ops, policy, k, 0.0, std::vector<std::size_t>(inst.mdps.size(), 0));
      for (std::size_t q = 0; q < inst.dfa.n_states; ++q) {
        DenseTensor tree_q = reconstruct(reconstruct_value(run.tree, q), inst.sizes);
        for (std::size_t s = 0; s < space.n_states; ++s)
          CHECK(std::abs(tree_q.data[s] - dense[k].per_mode[q][s]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("per-step policies carry exact time-varying semantics") {
  ReachChain rc = reach_chain(true);
  Instance inst = rc.as_instance("reach g");
  TreeOps ops = inst.make_ops();
  std::mt19937_64 rng(31);
  // three distinct creation-step slices, executed newest first
  DecoupledPolicy exec;
  for (int t = 0; t < 3; ++t) exec.steps.push_back(random_stationary_policy(rng, inst).steps[0]);

  SynthesisOutcome run = run_tree_vi(inst, ops, exec, 3, 0.0, {1});
  JointSpace space = build_joint_space(inst.mdps, inst.labeling, inst.dfa);
  auto dense = dense_vi_fixed_policy_direct(space, inst.mdps, inst.dfa,
                                            as_joint_policy(exec, space), 3);
  for (std::size_t q = 0; q < inst.dfa.n_states; ++q) {
    DenseTensor tree_q = reconstruct(reconstruct_value(run.tree, q), inst.sizes);
    for (std::size_t s = 0; s < space.n_states; ++s)
      CHECK(std::abs(tree_q.data[s] - dense[3].per_mode[q][s]) <= 1e-12);
  }
}

TEST_CASE("pruning keeps a pointwise lower bound, monotone in the threshold") {
  std::mt19937_64 rng(808);
  for (int rep = 0; rep < 4; ++rep) {
    RunConfig cfg = random_instance(rng);
    Instance inst = build_instance(cfg);
    TreeOps ops = inst.make_ops();
    DecoupledPolicy policy = random_stationary_policy(rng, inst);
    std::vector<std::size_t> s0(inst.mdps.size(), 0);

    SynthesisOutcome full = run_tree_vi(inst, ops, policy, cfg.horizon, 0.0, s0);
    double prev_threshold_value = std::numeric_limits<double>::infinity();
    for (double v_th : {1e-3, 1e-2, 1e-1}) {
      SynthesisOutcome pruned = run_tree_vi(inst, ops, policy, cfg.horizon, v_th, s0);
      validate_tree(pruned.tree, ops);
      double max_pruned_minus_full = -1.0;
      for (std::size_t q = 0; q < inst.dfa.n_states; ++q) {
        DenseTensor dp = reconstruct(reconstruct_value(pruned.tree, q), inst.sizes);
        DenseTensor df = reconstruct(reconstruct_value(full.tree, q), inst.sizes);
        for (std::size_t s = 0; s < dp.size(); ++s) {
          CHECK(dp.data[s] <= df.data[s] + 1e-10);
          CHECK(df.data[s] <= 1.0 + 1e-9);
          max_pruned_minus_full = std::max(max_pruned_minus_full, dp.data[s] - df.data[s]);
        }
      }
      CHECK(pruned.lower_bound <= prev_threshold_value + 1e-10);
      prev_threshold_value = pruned.lower_bound;
    }
  }
}

TEST_CASE("validator rejects corrupted trees") {
  ReachChain rc = reach_chain();
  Instance inst = rc.as_instance("reach g");
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_tree_vi(inst, ops, zero_policy(rc), 2, 0.0, {1});
  validate_tree(run.tree, ops);

  ValueTree bad = run.tree;
  bad.vertices[0].value.factors[0][0] = 0.5;  // root must stay all-ones
  CHECK_THROWS_AS(validate_tree(bad, ops), std::logic_error);

  ValueTree bad2 = run.tree;
  bad2.vertices[1].mode = rc.dfa.accepting;
  CHECK_THROWS_AS(validate_tree(bad2, ops), std::logic_error);

  ValueTree bad3 = run.tree;
  bad3.vertices[1].children_alive = 7;
  CHECK_THROWS_AS(validate_tree(bad3, ops), std::logic_error);
}

TEST_CASE("snapshots are byte-stable and recount the stored scalars") {
  namespace fs = std::filesystem;
  ReachChain rc = reach_pair();
  Instance inst = rc.as_instance("reach");
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_tree_vi(inst, ops, zero_policy(rc), 3, 0.0, {1, 1});

  fs::path a = fs::temp_directory_path() / "ttvi_tree_a.json";
  fs::path b = fs::temp_directory_path() / "ttvi_tree_b.json";
  TreeSnapshotMeta meta{123456789u, 3, 0.0};
  save_tree_snapshot(run.tree, ops, meta, a.string());
  save_tree_snapshot(run.tree, ops, meta, b.string());
  std::ifstream fa(a.string()), fb(b.string());
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(!sa.empty());

  LoadedTreeSnapshot snap = load_tree_snapshot(a.string());
  CHECK(snap.meta.config_hash == 123456789u);
  CHECK(snap.meta.iteration == 3);
  CHECK(snap.vertices.size() == run.tree.alive_count());
  CHECK(snap.scalars_stored() == run.tree.scalars_stored());
  // edges carry the guard strings of their vertices
  bool found_guard = false;
  for (const auto& v : snap.vertices)
    if (v.parent != npos && !v.guard.empty()) found_guard = true;
  CHECK(found_guard);
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("sup-change bound dominates the true change") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    RankOneTensor a, b;
    for (std::size_t n : {3u, 4u}) {
      Vec fa(n), fb(n);
      for (std::size_t i = 0; i < n; ++i) {
        fa[i] = unit(rng);
        fb[i] = unit(rng);
      }
      a.factors.push_back(fa);
      b.factors.push_back(fb);
    }
    DenseTensor da = reconstruct(a), db = reconstruct(b);
    double true_max = 0.0;
    for (std::size_t s = 0; s < da.size(); ++s)
      true_max = std::max(true_max, std::abs(da.data[s] - db.data[s]));
    CHECK(rank_one_diff_bound(a, b) >= true_max - 1e-12);
  }
}
