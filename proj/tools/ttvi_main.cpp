#include <iostream>

#include "CLI11.hpp"
#include "ttvi/pipeline.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string horizon;
  double vth = -1.0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "Monte-Carlo seed (overrides config)");
  cmd->add_option("--vth", opts.vth, "pruning threshold (overrides config)");
  cmd->add_option("--horizon", opts.horizon, "horizon: integer or 'inf' (overrides config)");
}

ttvi::RunConfig load_with_overrides(const CommonOptions& opts) {
  ttvi::RunConfig cfg = ttvi::load_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.seed >= 0) cfg.mc_seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.vth >= 0.0) cfg.v_th = opts.vth;
  if (!opts.horizon.empty()) {
    if (opts.horizon == "inf" || opts.horizon == "infinite") {
      cfg.infinite_horizon = true;
    } else {
      cfg.infinite_horizon = false;
      cfg.horizon = std::stoull(opts.horizon);
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor-tree value iteration for stochastic temporal-logic synthesis"};
  app.require_subcommand(1);

  CommonOptions abstract_opts, translate_opts, synth_opts, verify_opts, bench_opts;
  CLI::App* cmd_abstract = app.add_subcommand("abstract", "build the subsystem abstractions");
  add_common(cmd_abstract, abstract_opts);
  CLI::App* cmd_translate =
      app.add_subcommand("translate", "compile the specification to a guard-factored automaton");
  add_common(cmd_translate, translate_opts);
  CLI::App* cmd_synthesize =
      app.add_subcommand("synthesize", "synthesize a policy and certified lower bound");
  add_common(cmd_synthesize, synth_opts);
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "synthesize, compare against the dense oracle and run Monte-Carlo validation");
  add_common(cmd_verify, verify_opts);
  CLI::App* cmd_benchmark = app.add_subcommand("benchmark", "run the configured sweep to CSV");
  add_common(cmd_benchmark, bench_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_abstract->parsed()) {
      auto summary = ttvi::cmd_abstract(load_with_overrides(abstract_opts));
      for (std::size_t i = 0; i < summary.names.size(); ++i)
        std::cout << summary.names[i] << ": " << summary.n_states[i] << " states, "
                  << summary.n_actions[i] << " actions, max row-sum error "
                  << summary.max_row_sum_error[i] << "\n";
      for (const auto& w : summary.warnings)
        std::cout << "warning: boundary " << w.endpoint << " of '" << w.ap_name
                  << "' is off-grid (nearest cell edge " << w.nearest_cell_edge << ")\n";
    } else if (cmd_translate->parsed()) {
      auto summary = ttvi::cmd_translate(load_with_overrides(translate_opts));
      std::cout << "DFA: " << summary.dfa_states << " states (" << summary.live_states
                << " can reach accepting), written to " << summary.dfa_path << "\n";
      for (std::size_t q = 0; q < summary.conjunctions_per_mode.size(); ++q)
        std::cout << "  q" << q << ": " << summary.conjunctions_per_mode[q]
                  << " guard conjunctions\n";
    } else if (cmd_synthesize->parsed()) {
      auto report = ttvi::cmd_synthesize(load_with_overrides(synth_opts));
      std::cout << ttvi::report_summary(report);
    } else if (cmd_verify->parsed()) {
      auto report = ttvi::cmd_verify(load_with_overrides(verify_opts));
      std::cout << ttvi::report_summary(report);
      if (report.oracle.ran && report.oracle.min_slack < -1e-10) {
        std::cerr << "lower-bound violation: min slack " << report.oracle.min_slack << "\n";
        return 2;
      }
    } else if (cmd_benchmark->parsed()) {
      auto result = ttvi::cmd_benchmark(load_with_overrides(bench_opts));
      std::cout << "benchmark rows: " << result.rows.size() << ", CSV: " << result.csv_path
                << "\n";
      for (const auto& row : result.rows)
        std::cout << "  " << row.sweep_var << ": " << row.time_s << " s, "
                  << row.scalars_stored << " scalars, bound " << row.lower_bound << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
