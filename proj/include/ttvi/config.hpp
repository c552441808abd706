#pragma once

#include <optional>

#include "ttvi/grid.hpp"

namespace ttvi {

struct SubsystemConfig {
  std::string name;
  SubsystemDynamics dynamics;
  GridSpec grid;
};

struct SweepConfig {
  std::string mode;               // "grids" or "dims"
  std::vector<std::size_t> grids; // cells per dimension, grids mode
  std::vector<std::size_t> dims;  // subsystem counts, dims mode
};

/// Everything one run needs. Loaded from a single JSON file; unknown keys are
/// rejected so typos fail fast. See the README for the field-by-field schema.
struct RunConfig {
  std::vector<SubsystemConfig> subsystems;
  std::vector<LabelingPredicate> predicates;
  Vec initial_state;  // concatenated over subsystems

  std::string formula;   // exactly one of formula / dfa_file
  std::string dfa_file;

  bool infinite_horizon = false;
  std::size_t horizon = 10;
  double v_th = 1e-4;
  std::size_t policy_passes = 2;
  bool oracle_enabled = false;
  double infinite_tol = 1e-6;
  std::size_t mc_episodes = 100000;
  std::uint64_t mc_seed = 1;
  std::string output_dir = "out";
  std::size_t dense_cap = kDefaultDenseCap;
  std::size_t dfa_state_cap = kDefaultDfaStateCap;
  std::size_t iteration_cap = kDefaultIterationCap;
  std::optional<SweepConfig> sweep;

  std::vector<std::string> ap_names() const;
  /// Initial cell index per subsystem (sink when a block leaves its box).
  std::vector<std::size_t> initial_cells(const std::vector<SubsystemMdp>& mdps) const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// Hash of the canonical serialized configuration; stamped into snapshots.
std::uint64_t config_hash(const RunConfig& cfg);

/// Replicate subsystem 0 of the template d times and emit the step-bounded
/// all-safe specification over per-copy propositions; used by the dims sweep.
RunConfig replicate_for_dims(const RunConfig& base, std::size_t dims);

/// Same system with every state dimension regridded to `cells`; used by the
/// grid sweep.
RunConfig regrid(const RunConfig& base, std::size_t cells);

}  // namespace ttvi
