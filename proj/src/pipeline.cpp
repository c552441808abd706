#include "ttvi/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

namespace ttvi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double tree_bound_at(const ValueTree& tree, const Dfa& dfa, const Labeling& labeling,
                     std::span<const std::size_t> cells, std::size_t* mode_out) {
  std::size_t q0 = dfa.step(dfa.initial, labeling.letter(cells));
  if (mode_out != nullptr) *mode_out = q0;
  if (q0 == dfa.accepting) return 1.0;
  return reconstruct_value(tree, q0).value_at(cells);
}

std::vector<ModeSummary> summarize_modes(const ValueTree& tree, const Dfa& dfa,
                                         std::span<const std::size_t> cells) {
  std::vector<ModeSummary> out;
  for (std::size_t q = 0; q < dfa.n_states; ++q) {
    CpdValue v = reconstruct_value(tree, q);
    if (v.terms.empty()) continue;
    ModeSummary s;
    s.q = q;
    s.terms = v.rank();
    for (const auto& term : v.terms) {
      double mean = 1.0;
      for (const auto& f : term.factors) {
        double sum = 0.0;
        for (double x : f) sum += x;
        mean *= sum / static_cast<double>(f.size());
      }
      s.mean += mean;
      s.max_bound += max_value(term);
    }
    s.value_at_s0 = cells.empty() ? 0.0 : v.value_at(cells);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Instance build_instance(const RunConfig& cfg) {
  Instance inst;
  inst.mdps.resize(cfg.subsystems.size());
  std::vector<std::exception_ptr> errors(cfg.subsystems.size());
#pragma omp parallel for schedule(dynamic)
  for (long long il = 0; il < static_cast<long long>(cfg.subsystems.size()); ++il) {
    const auto i = static_cast<std::size_t>(il);
    try {
      inst.mdps[i] = build_subsystem_mdp(cfg.subsystems[i].dynamics, cfg.subsystems[i].grid);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  inst.labeling = build_labeling(cfg.predicates, inst.mdps, &inst.warnings);
  const std::vector<std::string> aps = cfg.ap_names();
  if (!cfg.formula.empty()) {
    inst.dfa = to_dfa(parse_formula(cfg.formula, aps), aps, cfg.dfa_state_cap);
    inst.spec_text = cfg.formula;
  } else {
    inst.dfa = load_dfa_file(cfg.dfa_file, aps);
    inst.spec_text = "dfa:" + cfg.dfa_file;
  }
  inst.outgoing = factor_edges(inst.dfa);
  for (const auto& mdp : inst.mdps) inst.sizes.push_back(mdp.n_states);
  return inst;
}

namespace {

IterationMetrics collect_metrics(const ValueTree& tree, std::size_t k, std::size_t created,
                                 std::size_t pruned, const std::vector<double>& mode_change,
                                 std::size_t n_modes) {
  IterationMetrics m;
  m.k = k;
  m.vertices_alive = tree.alive_count();
  m.created = created;
  m.pruned = pruned;
  m.frontier = tree.frontier.size();
  m.scalars_stored = tree.scalars_stored();
  m.terms_per_mode = tree.terms_per_mode(n_modes);
  for (double c : mode_change) m.change_bound = std::max(m.change_bound, c);
  return m;
}

SynthesisOutcome run_loop(const Instance& inst, const TreeOps& ops, const RunConfig& cfg,
                          const DecoupledPolicy* fixed_policy, std::size_t horizon, double v_th,
                          const std::vector<std::size_t>& initial_cells) {
  SynthesisOutcome out;
  out.initial_cells = initial_cells;
  out.tree = init_tree(inst.sizes, inst.dfa);
  const std::size_t n_modes = inst.dfa.n_states;
  out.obs_per_step.push_back(out.tree.terms_per_mode(n_modes));
  out.iterations.push_back(collect_metrics(out.tree, 0, 0, 0, {}, n_modes));

  std::vector<PolicyStepSlices> sigma;  // creation order
  PolicyStepSlices prev;
  const std::size_t cap = cfg.infinite_horizon ? cfg.iteration_cap : horizon;
  std::size_t quiet_steps = 0;
  out.stop_reason = cap == 0 ? "horizon" : "";
  for (std::size_t k = 1; k <= cap; ++k) {
    PolicyStepSlices slices;
    if (fixed_policy != nullptr) {
      slices = fixed_policy->step(horizon - k);
    } else {
      slices = optimize_step(out.tree, ops, prev, cfg.policy_passes);
      prev = slices;
    }
    std::vector<double> mode_change(n_modes, 0.0);
    const std::size_t before = out.tree.vertices.size();
    expand(out.tree, ops, slices, &mode_change);
    const std::size_t created = out.tree.vertices.size() - before;
    const std::size_t pruned = prune(out.tree, PruneConfig{v_th}, &mode_change);
    sigma.push_back(std::move(slices));
    out.obs_per_step.push_back(out.tree.terms_per_mode(n_modes));
    out.iterations.push_back(collect_metrics(out.tree, k, created, pruned, mode_change, n_modes));
    out.iterations_run = k;

    if (cfg.infinite_horizon) {
      double change = out.iterations.back().change_bound;
      quiet_steps = change < cfg.infinite_tol ? quiet_steps + 1 : 0;
      if (out.tree.frontier.empty()) {
        out.stop_reason = "frontier-empty";
        break;
      }
      if (quiet_steps >= 3) {
        out.stop_reason = "converged";
        break;
      }
      if (k == cap) out.stop_reason = "iteration-cap";
    } else if (k == cap) {
      out.stop_reason = "horizon";
    }
  }

  // Execution order reverses creation order: the newest slice acts first.
  out.policy.steps.assign(sigma.rbegin(), sigma.rend());
  out.lower_bound =
      tree_bound_at(out.tree, inst.dfa, inst.labeling, initial_cells, &out.initial_mode);
  return out;
}

}  // namespace

SynthesisOutcome run_synthesis(const Instance& inst, const TreeOps& ops, const RunConfig& cfg) {
  return run_loop(inst, ops, cfg, nullptr, cfg.horizon, cfg.v_th, cfg.initial_cells(inst.mdps));
}

SynthesisOutcome run_tree_vi(const Instance& inst, const TreeOps& ops,
                             const DecoupledPolicy& policy, std::size_t horizon, double v_th,
                             const std::vector<std::size_t>& initial_cells) {
  if (policy.empty() && horizon > 0)
    throw std::invalid_argument("tree value iteration needs a policy");
  RunConfig cfg;
  cfg.infinite_horizon = false;
  cfg.horizon = horizon;
  return run_loop(inst, ops, cfg, &policy, horizon, v_th, initial_cells);
}

namespace {

RunReport base_report(const RunConfig& cfg, const Instance& inst, const SynthesisOutcome& run) {
  RunReport r;
  r.config_hash = config_hash(cfg);
  r.spec_text = inst.spec_text;
  r.dfa_states = inst.dfa.n_states;
  const auto live = inst.dfa.can_reach_accepting();
  for (bool b : live) r.dfa_live_states += b ? 1 : 0;
  for (std::size_t q = 0; q < inst.dfa.n_states; ++q)
    r.conjunctions_per_mode.push_back(inst.outgoing.conjunction_count(q));
  r.warnings = inst.warnings;
  r.infinite = cfg.infinite_horizon;
  r.horizon = cfg.infinite_horizon ? cfg.iteration_cap : cfg.horizon;
  r.iterations_run = run.iterations_run;
  r.stop_reason = run.stop_reason;
  r.lower_bound = run.lower_bound;
  r.initial_mode = run.initial_mode;
  r.initial_cells = run.initial_cells;
  r.mode_summaries = summarize_modes(run.tree, inst.dfa, run.initial_cells);
  r.iterations = run.iterations;
  r.rank_ledger = build_rank_ledger(run.obs_per_step, inst.dfa, inst.outgoing);
  return r;
}

void write_snapshots(const RunConfig& cfg, const Instance& inst, const TreeOps& ops,
                     const SynthesisOutcome& run, RunReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  TreeSnapshotMeta meta{report.config_hash, run.iterations_run, cfg.v_th};
  report.tree_path = (fs::path(cfg.output_dir) / "tree.json").string();
  save_tree_snapshot(run.tree, ops, meta, report.tree_path);
  report.policy_path = (fs::path(cfg.output_dir) / "policy.json").string();
  save_policy_snapshot(run.policy, report.config_hash, report.policy_path);
  (void)inst;
}

void run_monte_carlo(const RunConfig& cfg, const Instance& inst, const SynthesisOutcome& run,
                     RunReport& report) {
  if (cfg.mc_episodes == 0) return;
  report.mc = simulate(inst.mdps, inst.dfa, inst.labeling, run.policy, run.initial_cells,
                       run.iterations_run, cfg.mc_episodes, cfg.mc_seed);
  report.mc_ran = true;
}

}  // namespace

RunReport cmd_synthesize(const RunConfig& cfg) {
  const auto start = Clock::now();
  Instance inst = build_instance(cfg);
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_synthesis(inst, ops, cfg);
  RunReport report = base_report(cfg, inst, run);
  run_monte_carlo(cfg, inst, run, report);
  write_snapshots(cfg, inst, ops, run, report);
  report.wall_seconds = seconds_since(start);
  save_report(report, (std::filesystem::path(cfg.output_dir) / "report.json").string());
  return report;
}

RunReport cmd_verify(const RunConfig& cfg) {
  const auto start = Clock::now();
  Instance inst = build_instance(cfg);
  TreeOps ops = inst.make_ops();
  SynthesisOutcome run = run_synthesis(inst, ops, cfg);
  RunReport report = base_report(cfg, inst, run);

  if (!cfg.oracle_enabled) {
    report.oracle.skipped_reason = "disabled in config";
  } else {
    std::size_t joint = 1;
    bool over = false;
    for (const auto& mdp : inst.mdps) {
      if (joint > cfg.dense_cap / mdp.n_states) over = true;
      if (over) break;
      joint *= mdp.n_states;
    }
    if (over || joint * inst.dfa.n_states > cfg.dense_cap) {
      report.oracle.skipped_reason = "joint space exceeds the dense cap";
    } else {
      JointSpace space = build_joint_space(inst.mdps, inst.labeling, inst.dfa, cfg.dense_cap);
      auto optimal =
          dense_vi_optimal(space, inst.mdps, inst.dfa, inst.outgoing, inst.labeling,
                           run.iterations_run);
      const DenseValueField& dense = optimal.history.back();

      std::vector<CpdValue> tree_values(inst.dfa.n_states);
      for (std::size_t q = 0; q < inst.dfa.n_states; ++q)
        tree_values[q] = reconstruct_value(run.tree, q);

      namespace fs = std::filesystem;
      fs::create_directories(cfg.output_dir);
      std::vector<std::string> header;
      for (std::size_t i = 0; i < inst.mdps.size(); ++i)
        header.push_back("cell_" + std::to_string(i));
      header.insert(header.end(), {"mode", "dense_optimal", "tree_value", "error"});
      CsvWriter csv(header);

      double max_error = -std::numeric_limits<double>::infinity();
      double min_slack = std::numeric_limits<double>::infinity();
      std::vector<std::size_t> idx;
      for (std::size_t s = 0; s < space.n_states; ++s) {
        space.decompose_state(s, idx);
        std::size_t q0 = inst.dfa.step(inst.dfa.initial, space.letters[s]);
        double dv = q0 == inst.dfa.accepting ? 1.0 : dense.per_mode[q0][s];
        double tv = q0 == inst.dfa.accepting ? 1.0 : tree_values[q0].value_at(idx);
        double err = dv - tv;
        max_error = std::max(max_error, err);
        min_slack = std::min(min_slack, err);
        std::vector<std::string> row;
        for (std::size_t c : idx) row.push_back(std::to_string(c));
        row.push_back(std::to_string(q0));
        row.push_back(csv_field(dv));
        row.push_back(csv_field(tv));
        row.push_back(csv_field(err));
        csv.add_row(row);
      }
      report.oracle.ran = true;
      report.oracle.max_error = max_error;
      report.oracle.min_slack = min_slack;
      report.oracle.dense_bound_s0 =
          satisfaction_at(space, inst.dfa, dense, space.compose_state(run.initial_cells));
      report.oracle.error_map_path = (fs::path(cfg.output_dir) / "error_map.csv").string();
      csv.save(report.oracle.error_map_path);
    }
  }

  run_monte_carlo(cfg, inst, run, report);
  write_snapshots(cfg, inst, ops, run, report);
  report.wall_seconds = seconds_since(start);
  save_report(report, (std::filesystem::path(cfg.output_dir) / "verify_report.json").string());
  return report;
}

BenchmarkResult cmd_benchmark(const RunConfig& cfg) {
  if (!cfg.sweep.has_value())
    throw std::invalid_argument("benchmark needs a 'benchmark' sweep section in the config");
  const SweepConfig& sweep = *cfg.sweep;
  BenchmarkResult result;
  const std::vector<std::size_t>& points = sweep.mode == "dims" ? sweep.dims : sweep.grids;
  if (points.empty()) throw std::invalid_argument("benchmark sweep has no points");

  for (std::size_t p : points) {
    RunConfig point_cfg = sweep.mode == "dims" ? replicate_for_dims(cfg, p) : regrid(cfg, p);
    const auto start = Clock::now();
    Instance inst = build_instance(point_cfg);
    TreeOps ops = inst.make_ops();
    SynthesisOutcome run = run_synthesis(inst, ops, point_cfg);
    BenchmarkRow row;
    row.sweep_var = p;
    row.time_s = seconds_since(start);
    row.scalars_stored = run.tree.scalars_stored();
    row.lower_bound = run.lower_bound;
    for (std::size_t k = 1; k < run.iterations.size(); ++k)
      row.vertices_by_iter.push_back(run.iterations[k].vertices_alive);
    result.rows.push_back(std::move(row));
  }

  std::size_t max_iters = 0;
  for (const auto& row : result.rows) max_iters = std::max(max_iters, row.vertices_by_iter.size());
  std::vector<std::string> header{"sweep_var", "time_s", "scalars_stored", "lower_bound"};
  for (std::size_t k = 1; k <= max_iters; ++k) header.push_back("vertices_iter_" + std::to_string(k));
  CsvWriter csv(header);
  for (const auto& row : result.rows) {
    std::vector<std::string> fields{std::to_string(row.sweep_var), csv_field(row.time_s),
                                    std::to_string(row.scalars_stored),
                                    csv_field(row.lower_bound)};
    for (std::size_t k = 0; k < max_iters; ++k)
      fields.push_back(k < row.vertices_by_iter.size()
                           ? std::to_string(row.vertices_by_iter[k])
                           : std::string());
    csv.add_row(fields);
  }
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  result.csv_path = (fs::path(cfg.output_dir) / ("benchmark_" + sweep.mode + ".csv")).string();
  csv.save(result.csv_path);
  return result;
}

AbstractionSummary cmd_abstract(const RunConfig& cfg) {
  AbstractionSummary summary;
  std::vector<SubsystemMdp> mdps(cfg.subsystems.size());
  for (std::size_t i = 0; i < cfg.subsystems.size(); ++i) {
    mdps[i] = build_subsystem_mdp(cfg.subsystems[i].dynamics, cfg.subsystems[i].grid);
    summary.names.push_back(cfg.subsystems[i].name);
    summary.n_states.push_back(mdps[i].n_states);
    summary.n_actions.push_back(mdps[i].n_actions);
    double worst = 0.0;
    for (std::size_t a = 0; a < mdps[i].n_actions; ++a)
      for (std::size_t s = 0; s < mdps[i].n_states; ++s) {
        const double* row = mdps[i].row(a, s);
        double sum = 0.0;
        for (std::size_t t = 0; t < mdps[i].n_states; ++t) sum += row[t];
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    summary.max_row_sum_error.push_back(worst);
  }
  build_labeling(cfg.predicates, mdps, &summary.warnings);
  return summary;
}

TranslationSummary cmd_translate(const RunConfig& cfg) {
  TranslationSummary summary;
  const std::vector<std::string> aps = cfg.ap_names();
  Dfa dfa;
  if (!cfg.formula.empty())
    dfa = to_dfa(parse_formula(cfg.formula, aps), aps, cfg.dfa_state_cap);
  else
    dfa = load_dfa_file(cfg.dfa_file, aps);
  OutgoingTransitions outgoing = factor_edges(dfa);
  summary.dfa_states = dfa.n_states;
  for (bool b : dfa.can_reach_accepting()) summary.live_states += b ? 1 : 0;
  for (std::size_t q = 0; q < dfa.n_states; ++q)
    summary.conjunctions_per_mode.push_back(outgoing.conjunction_count(q));
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  summary.dfa_path = (fs::path(cfg.output_dir) / "dfa.json").string();
  save_dfa_file(dfa, outgoing, summary.dfa_path);
  return summary;
}

}  // namespace ttvi
