#include "ttvi/config.hpp"

#include <fstream>

#include "json.hpp"

namespace ttvi {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw std::invalid_argument("unknown key '" + key + "' in " + context);
  }
}

Interval parse_interval(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument(context + " must be a [lo, hi] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

std::vector<Interval> parse_box(const json& j, const std::string& context) {
  std::vector<Interval> box;
  for (const auto& iv : j) box.push_back(parse_interval(iv, context));
  return box;
}

SubsystemConfig parse_subsystem(const json& j, std::size_t index) {
  const std::string ctx = "system.subsystems[" + std::to_string(index) + "]";
  check_keys(j,
             {"name", "A", "B", "noise_std", "state_box", "input_box", "cells_per_dim",
              "inputs_per_dim"},
             ctx);
  SubsystemConfig s;
  s.name = j.value("name", "s" + std::to_string(index));
  s.dynamics.A = j.at("A").get<std::vector<Vec>>();
  s.dynamics.B = j.at("B").get<std::vector<Vec>>();
  s.dynamics.noise_std = j.at("noise_std").get<Vec>();
  s.dynamics.state_box = parse_box(j.at("state_box"), ctx + ".state_box");
  s.dynamics.input_box = parse_box(j.at("input_box"), ctx + ".input_box");
  s.dynamics.state_dim = s.dynamics.A.size();
  s.dynamics.input_dim = s.dynamics.B.empty() ? 0 : s.dynamics.B.front().size();
  s.grid.cells_per_dim = j.at("cells_per_dim").get<std::vector<std::size_t>>();
  s.grid.inputs_per_dim = j.at("inputs_per_dim").get<std::vector<std::size_t>>();
  return s;
}

LabelingPredicate parse_predicate(const json& j, std::size_t index) {
  const std::string ctx = "system.aps[" + std::to_string(index) + "]";
  check_keys(j, {"name", "subsystem", "interval", "output_row", "include_sink"}, ctx);
  LabelingPredicate p;
  p.ap_name = j.at("name").get<std::string>();
  p.subsystem_index = j.at("subsystem").get<std::size_t>();
  p.interval = parse_interval(j.at("interval"), ctx + ".interval");
  if (j.contains("output_row")) p.output_row = j.at("output_row").get<Vec>();
  p.include_sink = j.value("include_sink", false);
  return p;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"system", "spec", "horizon", "prune", "policy", "oracle", "mc", "output", "caps",
              "benchmark"},
             "config");
  RunConfig cfg;

  const json& system = j.at("system");
  check_keys(system, {"subsystems", "aps", "initial_state"}, "system");
  std::size_t si = 0;
  for (const auto& sj : system.at("subsystems")) cfg.subsystems.push_back(parse_subsystem(sj, si++));
  if (cfg.subsystems.empty()) throw std::invalid_argument("at least one subsystem is required");
  std::size_t pi = 0;
  if (system.contains("aps"))
    for (const auto& pj : system.at("aps")) cfg.predicates.push_back(parse_predicate(pj, pi++));
  for (const auto& p : cfg.predicates)
    if (p.subsystem_index >= cfg.subsystems.size())
      throw std::invalid_argument("predicate '" + p.ap_name + "' references subsystem " +
                                  std::to_string(p.subsystem_index) + " but only " +
                                  std::to_string(cfg.subsystems.size()) + " are declared");
  if (system.contains("initial_state")) cfg.initial_state = system.at("initial_state").get<Vec>();
  std::size_t total_dim = 0;
  for (const auto& s : cfg.subsystems) total_dim += s.dynamics.state_dim;
  if (!cfg.initial_state.empty() && cfg.initial_state.size() != total_dim)
    throw std::invalid_argument("initial_state must have " + std::to_string(total_dim) +
                                " entries");

  const json& spec = j.at("spec");
  check_keys(spec, {"formula", "dfa_file"}, "spec");
  if (spec.contains("formula") == spec.contains("dfa_file"))
    throw std::invalid_argument("spec needs exactly one of 'formula' or 'dfa_file'");
  if (spec.contains("formula")) cfg.formula = spec.at("formula").get<std::string>();
  if (spec.contains("dfa_file")) cfg.dfa_file = spec.at("dfa_file").get<std::string>();

  if (j.contains("horizon")) {
    if (j.at("horizon").is_string()) {
      const auto h = j.at("horizon").get<std::string>();
      if (h != "infinite" && h != "inf")
        throw std::invalid_argument("horizon must be an integer or \"infinite\"");
      cfg.infinite_horizon = true;
    } else {
      cfg.horizon = j.at("horizon").get<std::size_t>();
    }
  }
  if (j.contains("prune")) {
    check_keys(j.at("prune"), {"v_th"}, "prune");
    cfg.v_th = j.at("prune").value("v_th", cfg.v_th);
  }
  if (cfg.v_th < 0.0 || cfg.v_th > 1.0)
    throw std::invalid_argument("prune.v_th must lie in [0,1]");
  if (j.contains("policy")) {
    check_keys(j.at("policy"), {"passes"}, "policy");
    cfg.policy_passes = j.at("policy").value("passes", cfg.policy_passes);
  }
  if (j.contains("oracle")) {
    check_keys(j.at("oracle"), {"enabled", "tol"}, "oracle");
    cfg.oracle_enabled = j.at("oracle").value("enabled", cfg.oracle_enabled);
    cfg.infinite_tol = j.at("oracle").value("tol", cfg.infinite_tol);
  }
  if (j.contains("mc")) {
    check_keys(j.at("mc"), {"episodes", "seed"}, "mc");
    cfg.mc_episodes = j.at("mc").value("episodes", cfg.mc_episodes);
    cfg.mc_seed = j.at("mc").value("seed", cfg.mc_seed);
  }
  if (j.contains("output")) {
    check_keys(j.at("output"), {"dir"}, "output");
    cfg.output_dir = j.at("output").value("dir", cfg.output_dir);
  }
  if (j.contains("caps")) {
    check_keys(j.at("caps"), {"dense", "dfa_states", "max_iterations"}, "caps");
    cfg.dense_cap = j.at("caps").value("dense", cfg.dense_cap);
    cfg.dfa_state_cap = j.at("caps").value("dfa_states", cfg.dfa_state_cap);
    cfg.iteration_cap = j.at("caps").value("max_iterations", cfg.iteration_cap);
  }
  if (j.contains("benchmark")) {
    const json& b = j.at("benchmark");
    check_keys(b, {"mode", "grids", "dims"}, "benchmark");
    SweepConfig sweep;
    sweep.mode = b.at("mode").get<std::string>();
    if (sweep.mode == "grids")
      sweep.grids = b.at("grids").get<std::vector<std::size_t>>();
    else if (sweep.mode == "dims")
      sweep.dims = b.at("dims").get<std::vector<std::size_t>>();
    else
      throw std::invalid_argument("benchmark.mode must be 'grids' or 'dims'");
    cfg.sweep = std::move(sweep);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::vector<std::string> RunConfig::ap_names() const {
  std::vector<std::string> names;
  names.reserve(predicates.size());
  for (const auto& p : predicates) names.push_back(p.ap_name);
  return names;
}

std::vector<std::size_t> RunConfig::initial_cells(const std::vector<SubsystemMdp>& mdps) const {
  if (initial_state.empty())
    throw std::invalid_argument("config has no system.initial_state");
  std::vector<std::size_t> cells(mdps.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < mdps.size(); ++i) {
    const std::size_t d = subsystems[i].dynamics.state_dim;
    std::span<const double> block(initial_state.data() + offset, d);
    std::size_t c = mdps[i].geometry.locate(block);
    cells[i] = c == npos ? mdps[i].sink_index : c;
    offset += d;
  }
  return cells;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  auto subsystems = nlohmann::ordered_json::array();
  for (const auto& s : cfg.subsystems) {
    nlohmann::ordered_json sj;
    sj["name"] = s.name;
    sj["A"] = s.dynamics.A;
    sj["B"] = s.dynamics.B;
    sj["noise_std"] = s.dynamics.noise_std;
    auto box = nlohmann::ordered_json::array();
    for (const auto& iv : s.dynamics.state_box) box.push_back({iv.lo, iv.hi});
    sj["state_box"] = box;
    auto ibox = nlohmann::ordered_json::array();
    for (const auto& iv : s.dynamics.input_box) ibox.push_back({iv.lo, iv.hi});
    sj["input_box"] = ibox;
    sj["cells_per_dim"] = s.grid.cells_per_dim;
    sj["inputs_per_dim"] = s.grid.inputs_per_dim;
    subsystems.push_back(std::move(sj));
  }
  j["subsystems"] = std::move(subsystems);
  auto aps = nlohmann::ordered_json::array();
  for (const auto& p : cfg.predicates) {
    nlohmann::ordered_json pj;
    pj["name"] = p.ap_name;
    pj["subsystem"] = p.subsystem_index;
    pj["interval"] = {p.interval.lo, p.interval.hi};
    if (p.output_row) pj["output_row"] = *p.output_row;
    pj["include_sink"] = p.include_sink;
    aps.push_back(std::move(pj));
  }
  j["aps"] = std::move(aps);
  j["initial_state"] = cfg.initial_state;
  j["formula"] = cfg.formula;
  j["dfa_file"] = cfg.dfa_file;
  j["infinite_horizon"] = cfg.infinite_horizon;
  j["horizon"] = cfg.horizon;
  j["v_th"] = cfg.v_th;
  j["policy_passes"] = cfg.policy_passes;
  j["oracle_enabled"] = cfg.oracle_enabled;
  j["infinite_tol"] = cfg.infinite_tol;
  j["mc_episodes"] = cfg.mc_episodes;
  j["mc_seed"] = cfg.mc_seed;
  j["dense_cap"] = cfg.dense_cap;
  j["dfa_state_cap"] = cfg.dfa_state_cap;
  j["iteration_cap"] = cfg.iteration_cap;
  return fnv1a(j.dump());
}

RunConfig replicate_for_dims(const RunConfig& base, std::size_t dims) {
  if (base.subsystems.empty() || base.predicates.empty())
    throw std::invalid_argument("dims sweep needs a template subsystem and predicate");
  RunConfig cfg = base;
  cfg.sweep.reset();
  cfg.subsystems.clear();
  cfg.predicates.clear();
  cfg.initial_state.clear();
  const SubsystemConfig& proto = base.subsystems.front();
  const LabelingPredicate& pred_proto = base.predicates.front();
  const std::size_t d = proto.dynamics.state_dim;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dims; ++i) {
    SubsystemConfig s = proto;
    s.name = proto.name + "_" + std::to_string(i + 1);
    cfg.subsystems.push_back(std::move(s));
    LabelingPredicate p = pred_proto;
    p.ap_name = pred_proto.ap_name + "_" + std::to_string(i + 1);
    p.subsystem_index = i;
    cfg.predicates.push_back(std::move(p));
    names.push_back(cfg.predicates.back().ap_name);
    for (std::size_t k = 0; k < d; ++k)
      cfg.initial_state.push_back(base.initial_state.empty() ? 0.0 : base.initial_state[k]);
  }
  // All propositions at every step 0..5: conj & X(conj & X(... & X conj))
  std::string conj = "(";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) conj += " & ";
    conj += names[i];
  }
  conj += ")";
  std::string psi = conj;
  for (int t = 0; t < 5; ++t) psi = "(" + conj + " & X " + psi + ")";
  cfg.formula = psi;
  cfg.dfa_file.clear();
  return cfg;
}

RunConfig regrid(const RunConfig& base, std::size_t cells) {
  RunConfig cfg = base;
  cfg.sweep.reset();
  for (auto& s : cfg.subsystems)
    for (auto& c : s.grid.cells_per_dim) c = cells;
  return cfg;
}

}  // namespace ttvi
