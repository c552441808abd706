#pragma once

#include "ttvi/config.hpp"
#include "ttvi/policy.hpp"
#include "ttvi/report.hpp"

namespace ttvi {

/// A fully built problem instance: subsystem abstractions, labeling, and the
/// factored automaton. TreeOps point into these members, so build them with
/// make_ops() after the instance has its final address.
struct Instance {
  std::vector<SubsystemMdp> mdps;
  Labeling labeling;
  std::vector<BoundaryWarning> warnings;
  Dfa dfa;
  OutgoingTransitions outgoing;
  std::vector<std::size_t> sizes;
  std::string spec_text;

  TreeOps make_ops() const { return make_tree_ops(dfa, outgoing, labeling, mdps); }
};

Instance build_instance(const RunConfig& cfg);

struct SynthesisOutcome {
  ValueTree tree;
  DecoupledPolicy policy;  // execution order
  std::vector<IterationMetrics> iterations;
  std::vector<std::vector<std::size_t>> obs_per_step;  // term counts, [k][q]
  std::size_t iterations_run = 0;
  std::string stop_reason;
  double lower_bound = 0.0;
  std::size_t initial_mode = 0;
  std::vector<std::size_t> initial_cells;
};

/// Alternates policy optimization, growth and pruning for the configured
/// horizon (or until the infinite-horizon stop rule fires). The reported
/// bound is the tree value of the returned execution-order policy.
SynthesisOutcome run_synthesis(const Instance& inst, const TreeOps& ops, const RunConfig& cfg);

/// Growth and pruning under a fixed (possibly time-varying, execution-order)
/// policy; no optimization. Used for oracle comparisons.
SynthesisOutcome run_tree_vi(const Instance& inst, const TreeOps& ops,
                             const DecoupledPolicy& policy, std::size_t horizon, double v_th,
                             const std::vector<std::size_t>& initial_cells);

RunReport cmd_synthesize(const RunConfig& cfg);
RunReport cmd_verify(const RunConfig& cfg);

struct BenchmarkRow {
  std::size_t sweep_var = 0;
  double time_s = 0.0;
  std::size_t scalars_stored = 0;
  double lower_bound = 0.0;
  std::vector<std::size_t> vertices_by_iter;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::string csv_path;
};

BenchmarkResult cmd_benchmark(const RunConfig& cfg);

struct AbstractionSummary {
  std::vector<std::string> names;
  std::vector<std::size_t> n_states;
  std::vector<std::size_t> n_actions;
  std::vector<double> max_row_sum_error;
  std::vector<BoundaryWarning> warnings;
};

AbstractionSummary cmd_abstract(const RunConfig& cfg);

struct TranslationSummary {
  std::size_t dfa_states = 0;
  std::size_t live_states = 0;
  std::vector<std::size_t> conjunctions_per_mode;
  std::string dfa_path;
};

TranslationSummary cmd_translate(const RunConfig& cfg);

}  // namespace ttvi
