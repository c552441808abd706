#pragma once

#include "ttvi/mc.hpp"
#include "ttvi/tree.hpp"

namespace ttvi {

struct IterationMetrics {
  std::size_t k = 0;
  std::size_t vertices_alive = 0;
  std::size_t created = 0;
  std::size_t pruned = 0;
  std::size_t frontier = 0;
  std::size_t scalars_stored = 0;
  std::vector<std::size_t> terms_per_mode;
  double change_bound = 0.0;  // max over modes of the sup-change upper bound
};

struct ModeSummary {
  std::size_t q = 0;
  std::size_t terms = 0;
  double mean = 0.0;       // exact mean over the joint state space
  double max_bound = 0.0;  // sum of term max-norms (upper bound on the max)
  double value_at_s0 = 0.0;
};

struct OracleComparison {
  bool ran = false;
  std::string skipped_reason;
  double max_error = 0.0;      // max over states of dense optimal - tree value
  double min_slack = 0.0;      // min over states of the same difference
  double dense_bound_s0 = 0.0;
  std::string error_map_path;
};

struct RunReport {
  std::uint64_t config_hash = 0;
  std::string spec_text;
  std::size_t dfa_states = 0;
  std::size_t dfa_live_states = 0;
  std::vector<std::size_t> conjunctions_per_mode;
  std::vector<BoundaryWarning> warnings;

  bool infinite = false;
  std::size_t horizon = 0;
  std::size_t iterations_run = 0;
  std::string stop_reason;

  double lower_bound = 0.0;
  std::size_t initial_mode = 0;
  std::vector<std::size_t> initial_cells;
  std::vector<ModeSummary> mode_summaries;
  std::vector<IterationMetrics> iterations;
  RankLedger rank_ledger;

  bool mc_ran = false;
  McResult mc;
  OracleComparison oracle;

  std::string tree_path;
  std::string policy_path;

  double wall_seconds = 0.0;  // environment metadata, excluded from determinism
};

/// Serialize the report; machine-readable body plus an "environment" object
/// holding wall time and hardware metadata. Identical configs and seeds give
/// byte-identical bodies once "environment" is dropped.
std::string report_to_json(const RunReport& report);
void save_report(const RunReport& report, const std::string& path);

/// The report with its "environment" member removed, for determinism checks.
std::string strip_environment(const std::string& report_json);

/// One-paragraph human summary printed by the CLI.
std::string report_summary(const RunReport& report);

/// RFC-4180 style CSV with a header row; fields containing separators or
/// quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& row);
  std::string str() const;
  void save(const std::string& path) const;

 private:
  std::size_t columns_;
  std::string body_;
};

std::string csv_field(double v);

}  // namespace ttvi
