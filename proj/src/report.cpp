#include "ttvi/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ttvi {

namespace {

using nlohmann::ordered_json;

ordered_json metrics_json(const IterationMetrics& m) {
  ordered_json j;
  j["k"] = m.k;
  j["vertices"] = m.vertices_alive;
  j["created"] = m.created;
  j["pruned"] = m.pruned;
  j["frontier"] = m.frontier;
  j["scalars_stored"] = m.scalars_stored;
  j["terms_per_mode"] = m.terms_per_mode;
  j["change_bound"] = m.change_bound;
  return j;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  ordered_json j;
  j["format"] = "ttvi-report-1";
  j["config_hash"] = r.config_hash;
  j["spec"] = r.spec_text;
  ordered_json dfa;
  dfa["states"] = r.dfa_states;
  dfa["live_states"] = r.dfa_live_states;
  dfa["conjunctions_per_mode"] = r.conjunctions_per_mode;
  j["dfa"] = std::move(dfa);
  auto warnings = ordered_json::array();
  for (const auto& w : r.warnings)
    warnings.push_back({{"ap", w.ap_name},
                        {"endpoint", w.endpoint},
                        {"nearest_cell_edge", w.nearest_cell_edge}});
  j["boundary_warnings"] = std::move(warnings);
  ordered_json run;
  run["infinite"] = r.infinite;
  run["horizon"] = r.horizon;
  run["iterations_run"] = r.iterations_run;
  run["stop_reason"] = r.stop_reason;
  j["run"] = std::move(run);
  ordered_json result;
  result["lower_bound"] = r.lower_bound;
  result["initial_mode"] = r.initial_mode;
  result["initial_cells"] = r.initial_cells;
  auto summaries = ordered_json::array();
  for (const auto& s : r.mode_summaries)
    summaries.push_back({{"q", s.q},
                         {"terms", s.terms},
                         {"mean", s.mean},
                         {"max_bound", s.max_bound},
                         {"value_at_s0", s.value_at_s0}});
  result["mode_summaries"] = std::move(summaries);
  j["result"] = std::move(result);
  auto iterations = ordered_json::array();
  for (const auto& m : r.iterations) iterations.push_back(metrics_json(m));
  j["iterations"] = std::move(iterations);
  auto ledger = ordered_json::array();
  for (const auto& e : r.rank_ledger.entries)
    ledger.push_back({{"q", e.q}, {"k", e.k}, {"r_obs", e.r_obs}, {"r_bound", e.r_bound}});
  j["rank_ledger"] = std::move(ledger);
  if (r.mc_ran) {
    ordered_json mc;
    mc["episodes"] = r.mc.episodes;
    mc["accepted"] = r.mc.accepted;
    mc["frequency"] = r.mc.frequency;
    mc["std_error"] = r.mc.std_error;
    mc["wilson_lo"] = r.mc.wilson_lo;
    mc["wilson_hi"] = r.mc.wilson_hi;
    mc["trace_hash"] = r.mc.trace_hash;
    j["mc"] = std::move(mc);
  }
  if (r.oracle.ran || !r.oracle.skipped_reason.empty()) {
    ordered_json o;
    o["ran"] = r.oracle.ran;
    if (!r.oracle.skipped_reason.empty()) o["skipped_reason"] = r.oracle.skipped_reason;
    if (r.oracle.ran) {
      o["max_error"] = r.oracle.max_error;
      o["min_slack"] = r.oracle.min_slack;
      o["dense_bound_s0"] = r.oracle.dense_bound_s0;
      if (!r.oracle.error_map_path.empty()) o["error_map"] = r.oracle.error_map_path;
    }
    j["oracle"] = std::move(o);
  }
  ordered_json files;
  if (!r.tree_path.empty()) files["tree"] = r.tree_path;
  if (!r.policy_path.empty()) files["policy"] = r.policy_path;
  j["files"] = std::move(files);
  ordered_json env;
  env["wall_seconds"] = r.wall_seconds;
#ifdef _OPENMP
  env["omp_max_threads"] = omp_get_max_threads();
#else
  env["omp_max_threads"] = 1;
#endif
  env["hardware_concurrency"] = std::thread::hardware_concurrency();
  j["environment"] = std::move(env);
  return j.dump(2) + "\n";
}

void save_report(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report '" + path + "'");
  out << report_to_json(report);
}

std::string strip_environment(const std::string& report_json) {
  ordered_json j = ordered_json::parse(report_json);
  j.erase("environment");
  return j.dump(2);
}

std::string report_summary(const RunReport& r) {
  std::ostringstream os;
  os << "lower bound at s0: " << r.lower_bound << " (mode q" << r.initial_mode << ")\n";
  os << "iterations: " << r.iterations_run << " (" << r.stop_reason << ")";
  if (!r.iterations.empty()) {
    const auto& last = r.iterations.back();
    os << ", vertices: " << last.vertices_alive << ", scalars stored: " << last.scalars_stored;
  }
  os << "\n";
  if (r.mc_ran)
    os << "monte carlo: " << r.mc.frequency << " of " << r.mc.episodes << " episodes ["
       << r.mc.wilson_lo << ", " << r.mc.wilson_hi << "]\n";
  if (r.oracle.ran)
    os << "oracle: max error " << r.oracle.max_error << ", min slack " << r.oracle.min_slack
       << "\n";
  else if (!r.oracle.skipped_reason.empty())
    os << "oracle skipped: " << r.oracle.skipped_reason << "\n";
  os << "wall time: " << r.wall_seconds << " s\n";
  return os.str();
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  add_row(header);
}

void CsvWriter::add_row(const std::vector<std::string>& row) {
  if (row.size() != columns_) throw std::invalid_argument("CSV row width mismatch");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) body_ += ',';
    const std::string& f = row[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      body_ += '"';
      for (char c : f) {
        if (c == '"') body_ += '"';
        body_ += c;
      }
      body_ += '"';
    } else {
      body_ += f;
    }
  }
  body_ += "\r\n";
}

std::string CsvWriter::str() const { return body_; }

void CsvWriter::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write CSV '" + path + "'");
  out << body_;
}

std::string csv_field(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace ttvi
