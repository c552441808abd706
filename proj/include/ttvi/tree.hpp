#pragma once

#include "ttvi/decoupled_policy.hpp"

namespace ttvi {

struct TreeVertex {
  std::size_t id = 0;
  std::size_t parent = npos;      // npos only for the root
  std::size_t mode = 0;           // DFA state label
  std::size_t guard_index = npos; // edge into mode: outgoing.at[mode][guard_index]
  RankOneTensor value;
  std::uint32_t children_alive = 0;
  bool alive = true;
};

/// Rooted tree of rank-1 vertices. The root carries the accepting mode and the
/// all-ones value; every other vertex was created by applying the guard edge
/// (mode, guard_index) whose target is its parent's mode. Vertex ids are dense
/// and assigned in creation order; pruned vertices stay in the array with
/// alive == false.
struct ValueTree {
  std::vector<std::size_t> sizes;  // per-subsystem state counts
  std::vector<TreeVertex> vertices;
  std::vector<std::size_t> frontier;  // newest generation still eligible for growth
  std::size_t root = 0;

  std::size_t alive_count() const;
  /// Alive rank-1 vertices store one factor per subsystem each.
  std::size_t scalars_stored() const { return alive_count() * scalars_per_vertex(); }
  std::size_t scalars_per_vertex() const;
  std::vector<std::size_t> terms_per_mode(std::size_t n_modes) const;
};

struct PruneConfig {
  double v_th = 0.0;  // in [0,1]
};

/// Immutable context shared by tree operations.
struct TreeOps {
  const Dfa* dfa = nullptr;
  const OutgoingTransitions* outgoing = nullptr;
  const std::vector<SubsystemMdp>* mdps = nullptr;
  /// guard_indicators[q][e][i]: subsystem-i indicator of outgoing.at[q][e].
  std::vector<std::vector<std::vector<Vec>>> guard_indicators;
  /// incoming[q']: (q, e) pairs with outgoing.at[q][e].target == q', q not accepting.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incoming;
};

TreeOps make_tree_ops(const Dfa& dfa, const OutgoingTransitions& outgoing,
                      const Labeling& labeling, const std::vector<SubsystemMdp>& mdps);

/// Single root vertex: accepting mode, all-ones value.
ValueTree init_tree(const std::vector<std::size_t>& sizes, const Dfa& dfa);

/// One growth step. Every stored value is re-derived from its parent's
/// previous value under this step's slices (so time-varying policies carry
/// exact Markov-recursion semantics; for stationary slices this recomputes
/// the same numbers), and each frontier vertex spawns one child per DFA
/// transition into its mode from a non-accepting source. The new children
/// become the frontier. Throws when a needed mode has no slice.
///
/// When mode_change is given, an upper bound on the sup-norm change of each
/// mode's reconstructed value is accumulated into it.
void expand(ValueTree& tree, const TreeOps& ops, const PolicyStepSlices& slices,
            std::vector<double>* mode_change = nullptr);

/// Remove leaves whose max-norm falls below v_th, cascading until no such leaf
/// remains; the root is never removed. Returns the number of vertices removed
/// and accumulates their max-norms into mode_change when given.
std::size_t prune(ValueTree& tree, const PruneConfig& cfg,
                  std::vector<double>* mode_change = nullptr);

/// Sum of all alive vertices labeled q, in id order; empty when none.
CpdValue reconstruct_value(const ValueTree& tree, std::size_t q);

/// Walks the rooted-tree invariants (single root, parent links, DFA edge
/// consistency, child counts, frontier membership) and throws on violation.
void validate_tree(const ValueTree& tree, const TreeOps& ops);

struct RankLedgerEntry {
  std::size_t q = 0;
  std::size_t k = 0;
  std::size_t r_obs = 0;
  std::size_t r_bound = 0;
};

struct RankLedger {
  std::vector<RankLedgerEntry> entries;
  bool all_within_bound() const;
};

/// Observed term counts per step against the recursion bound
/// R[0][q] = [q == accepting], R[k+1][q] = sum over outgoing edges of q of
/// R[k][target] (accepting pinned at 1).
RankLedger build_rank_ledger(const std::vector<std::vector<std::size_t>>& obs_per_step,
                             const Dfa& dfa, const OutgoingTransitions& outgoing);

/// Upper bound on the sup-norm of the difference of two rank-1 tensors with
/// equal shapes.
double rank_one_diff_bound(const RankOneTensor& a, const RankOneTensor& b);

// Versioned tree snapshot (JSON): vertices {id, q, factors}, edges
// {parent, guard, child}, metadata {iteration, v_th, config_hash}.
struct TreeSnapshotMeta {
  std::uint64_t config_hash = 0;
  std::size_t iteration = 0;
  double v_th = 0.0;
};

void save_tree_snapshot(const ValueTree& tree, const TreeOps& ops, const TreeSnapshotMeta& meta,
                        const std::string& path);

struct LoadedTreeVertex {
  std::size_t id = 0;
  std::size_t q = 0;
  std::size_t parent = npos;
  std::string guard;
  std::vector<Vec> factors;
};

struct LoadedTreeSnapshot {
  TreeSnapshotMeta meta;
  std::vector<std::size_t> sizes;
  std::vector<LoadedTreeVertex> vertices;
  std::size_t scalars_stored() const;
};

LoadedTreeSnapshot load_tree_snapshot(const std::string& path);

}  // namespace ttvi
