#include "ttvi/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace ttvi {

std::size_t ValueTree::alive_count() const {
  std::size_t n = 0;
  for (const auto& v : vertices) n += v.alive ? 1 : 0;
  return n;
}

std::size_t ValueTree::scalars_per_vertex() const {
  std::size_t n = 0;
  for (std::size_t s : sizes) n += s;
  return n;
}

std::vector<std::size_t> ValueTree::terms_per_mode(std::size_t n_modes) const {
  std::vector<std::size_t> counts(n_modes, 0);
  for (const auto& v : vertices)
    if (v.alive) ++counts[v.mode];
  return counts;
}

TreeOps make_tree_ops(const Dfa& dfa, const OutgoingTransitions& outgoing,
                      const Labeling& labeling, const std::vector<SubsystemMdp>& mdps) {
  TreeOps ops;
  ops.dfa = &dfa;
  ops.outgoing = &outgoing;
  ops.mdps = &mdps;
  ops.guard_indicators.resize(dfa.n_states);
  ops.incoming.resize(dfa.n_states);
  for (std::size_t q = 0; q < dfa.n_states; ++q) {
    const auto& edges = outgoing.at[q];
    ops.guard_indicators[q].reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      ops.guard_indicators[q].push_back(conjunction_indicators(edges[e].guard, labeling, mdps));
      if (q != dfa.accepting) ops.incoming[edges[e].target].emplace_back(q, e);
    }
  }
  return ops;
}

ValueTree init_tree(const std::vector<std::size_t>& sizes, const Dfa& dfa) {
  ValueTree tree;
  tree.sizes = sizes;
  TreeVertex root;
  root.id = 0;
  root.mode = dfa.accepting;
  root.value = ones_tensor(sizes);
  tree.vertices.push_back(std::move(root));
  tree.root = 0;
  tree.frontier = {0};
  return tree;
}

double rank_one_diff_bound(const RankOneTensor& a, const RankOneTensor& b) {
  // |prod a_i - prod b_i| <= sum_i (prod_{j<i} max|a_j|) max|a_i-b_i| (prod_{j>i} max|b_j|)
  const std::size_t m = a.factors.size();
  Vec amax(m, 0.0), bmax(m, 0.0), dmax(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (double x : a.factors[i]) amax[i] = std::max(amax[i], std::abs(x));
    for (double x : b.factors[i]) bmax[i] = std::max(bmax[i], std::abs(x));
    for (std::size_t s = 0; s < a.factors[i].size(); ++s)
      dmax[i] = std::max(dmax[i], std::abs(a.factors[i][s] - b.factors[i][s]));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double term = dmax[i];
    for (std::size_t j = 0; j < i; ++j) term *= amax[j];
    for (std::size_t j = i + 1; j < m; ++j) term *= bmax[j];
    total += term;
  }
  return total;
}

namespace {

struct ModeGather {
  bool valid = false;
  std::vector<GatheredMatrix> rows;  // per subsystem
};

std::vector<ModeGather> gather_all(const TreeOps& ops, const PolicyStepSlices& slices) {
  std::vector<ModeGather> out(ops.dfa->n_states);
  for (std::size_t q = 0; q < slices.size(); ++q) {
    if (!slices[q].has_value()) continue;
    const ModeSlices& ms = *slices[q];
    if (ms.per_subsystem.size() != ops.mdps->size())
      throw std::invalid_argument("mode slices must cover every subsystem");
    out[q].valid = true;
    out[q].rows.reserve(ms.per_subsystem.size());
    for (std::size_t i = 0; i < ms.per_subsystem.size(); ++i)
      out[q].rows.push_back(gather_rows((*ops.mdps)[i], ms.per_subsystem[i]));
  }
  return out;
}

RankOneTensor apply_edge(const TreeOps& ops, const std::vector<ModeGather>& gathered,
                         std::size_t q, std::size_t edge, const RankOneTensor& parent_value) {
  if (!gathered[q].valid)
    throw std::invalid_argument("missing policy slice for live mode " + std::to_string(q));
  std::vector<const GatheredMatrix*> rows;
  rows.reserve(gathered[q].rows.size());
  for (const auto& g : gathered[q].rows) rows.push_back(&g);
  return apply_conjunction(rows, ops.guard_indicators[q][edge], parent_value);
}

}  // namespace

void expand(ValueTree& tree, const TreeOps& ops, const PolicyStepSlices& slices,
            std::vector<double>* mode_change) {
  const std::vector<ModeGather> gathered = gather_all(ops, slices);
  const std::size_t n_old = tree.vertices.size();

  // Refresh every stored value from its parent's previous value. Reads only
  // old values, so the order is immaterial and the loop is parallel.
  std::vector<RankOneTensor> refreshed(n_old);
  std::vector<std::exception_ptr> errors(n_old);
#pragma omp parallel for schedule(dynamic, 8)
  for (long long idl = 0; idl < static_cast<long long>(n_old); ++idl) {
    const auto id = static_cast<std::size_t>(idl);
    const TreeVertex& v = tree.vertices[id];
    if (!v.alive || v.parent == npos) continue;
    try {
      refreshed[id] =
          apply_edge(ops, gathered, v.mode, v.guard_index, tree.vertices[v.parent].value);
    } catch (...) {
      errors[id] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Children of the frontier, one per DFA transition into the frontier
  // vertex's mode from a non-accepting source. Values derive from the
  // frontier's previous values.
  struct PendingChild {
    std::size_t parent;
    std::size_t mode;
    std::size_t guard_index;
  };
  std::vector<PendingChild> pending;
  for (std::size_t f : tree.frontier) {
    const TreeVertex& leaf = tree.vertices[f];
    for (const auto& [q, e] : ops.incoming[leaf.mode]) pending.push_back({f, q, e});
  }
  std::vector<RankOneTensor> child_values(pending.size());
  std::vector<std::exception_ptr> child_errors(pending.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long long pl = 0; pl < static_cast<long long>(pending.size()); ++pl) {
    const auto p = static_cast<std::size_t>(pl);
    try {
      child_values[p] = apply_edge(ops, gathered, pending[p].mode, pending[p].guard_index,
                                   tree.vertices[pending[p].parent].value);
    } catch (...) {
      child_errors[p] = std::current_exception();
    }
  }
  for (const auto& e : child_errors)
    if (e) std::rethrow_exception(e);

  // Commit: refreshed values first, then children in deterministic id order.
  for (std::size_t id = 0; id < n_old; ++id) {
    TreeVertex& v = tree.vertices[id];
    if (!v.alive || v.parent == npos) continue;
    if (mode_change != nullptr)
      (*mode_change)[v.mode] += rank_one_diff_bound(refreshed[id], v.value);
    v.value = std::move(refreshed[id]);
  }
  tree.frontier.clear();
  for (std::size_t p = 0; p < pending.size(); ++p) {
    TreeVertex child;
    child.id = tree.vertices.size();
    child.parent = pending[p].parent;
    child.mode = pending[p].mode;
    child.guard_index = pending[p].guard_index;
    child.value = std::move(child_values[p]);
    if (mode_change != nullptr) (*mode_change)[child.mode] += max_value(child.value);
    ++tree.vertices[child.parent].children_alive;
    tree.frontier.push_back(child.id);
    tree.vertices.push_back(std::move(child));
  }
}

std::size_t prune(ValueTree& tree, const PruneConfig& cfg, std::vector<double>* mode_change) {
  if (cfg.v_th < 0.0 || cfg.v_th > 1.0)
    throw std::invalid_argument("prune threshold must lie in [0,1]");
  std::vector<std::size_t> worklist;
  for (const auto& v : tree.vertices)
    if (v.alive && v.children_alive == 0 && v.id != tree.root) worklist.push_back(v.id);

  std::size_t removed = 0;
  while (!worklist.empty()) {
    std::size_t id = worklist.back();
    worklist.pop_back();
    TreeVertex& v = tree.vertices[id];
    if (!v.alive || v.children_alive != 0 || id == tree.root) continue;
    double m = max_value(v.value);
    if (m >= cfg.v_th) continue;
    v.alive = false;
    ++removed;
    if (mode_change != nullptr) (*mode_change)[v.mode] += m;
    TreeVertex& parent = tree.vertices[v.parent];
    if (--parent.children_alive == 0 && parent.id != tree.root) worklist.push_back(parent.id);
  }
  if (removed > 0)
    std::erase_if(tree.frontier, [&](std::size_t id) { return !tree.vertices[id].alive; });
  return removed;
}

CpdValue reconstruct_value(const ValueTree& tree, std::size_t q) {
  CpdValue out;
  for (const auto& v : tree.vertices)
    if (v.alive && v.mode == q) out.terms.push_back(v.value);
  return out;
}

void validate_tree(const ValueTree& tree, const TreeOps& ops) {
  const TreeVertex& root = tree.vertices.at(tree.root);
  if (!root.alive || root.parent != npos) throw std::logic_error("invalid tree root");
  if (root.mode != ops.dfa->accepting) throw std::logic_error("root must carry the accepting mode");
  for (const auto& f : root.value.factors)
    for (double x : f)
      if (x != 1.0) throw std::logic_error("root value must be all-ones");

  std::vector<std::uint32_t> child_counts(tree.vertices.size(), 0);
  for (const auto& v : tree.vertices) {
    if (v.id != tree.root && v.parent == npos) throw std::logic_error("extra root vertex");
    if (!v.alive) continue;
    if (v.value.factors.size() != tree.sizes.size())
      throw std::logic_error("vertex factor order mismatch");
    for (std::size_t i = 0; i < tree.sizes.size(); ++i)
      if (v.value.factors[i].size() != tree.sizes[i])
        throw std::logic_error("vertex factor length mismatch");
    if (v.id == tree.root) continue;
    if (v.parent >= v.id) throw std::logic_error("parent ids must precede children");
    const TreeVertex& parent = tree.vertices[v.parent];
    if (!parent.alive) throw std::logic_error("alive vertex with pruned parent");
    ++child_counts[v.parent];
    const auto& edges = ops.outgoing->at[v.mode];
    if (v.guard_index >= edges.size()) throw std::logic_error("guard index out of range");
    if (edges[v.guard_index].target != parent.mode)
      throw std::logic_error("edge target does not match parent mode");
    if (v.mode == ops.dfa->accepting) throw std::logic_error("accepting-mode child vertex");
  }
  for (const auto& v : tree.vertices)
    if (v.alive && v.children_alive != child_counts[v.id])
      throw std::logic_error("children_alive count out of sync");
  for (std::size_t f : tree.frontier) {
    if (f >= tree.vertices.size() || !tree.vertices[f].alive)
      throw std::logic_error("frontier references a pruned vertex");
    if (tree.vertices[f].children_alive != 0)
      throw std::logic_error("frontier vertex already has children");
  }
}

bool RankLedger::all_within_bound() const {
  for (const auto& e : entries)
    if (e.r_obs > e.r_bound) return false;
  return true;
}

RankLedger build_rank_ledger(const std::vector<std::vector<std::size_t>>& obs_per_step,
                             const Dfa& dfa, const OutgoingTransitions& outgoing) {
  RankLedger ledger;
  const std::size_t n = dfa.n_states;
  std::vector<std::size_t> bound(n, 0);
  bound[dfa.accepting] = 1;
  for (std::size_t k = 0; k < obs_per_step.size(); ++k) {
    if (k > 0) {
      std::vector<std::size_t> next(n, 0);
      next[dfa.accepting] = 1;
      for (std::size_t q = 0; q < n; ++q) {
        if (q == dfa.accepting) continue;
        std::size_t sum = 0;
        for (const auto& e : outgoing.at[q]) sum += bound[e.target];
        next[q] = sum;
      }
      bound = std::move(next);
    }
    for (std::size_t q = 0; q < n; ++q)
      ledger.entries.push_back({q, k, obs_per_step[k][q], bound[q]});
  }
  return ledger;
}

}  // namespace ttvi
