#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>

#include "ttvi/common.hpp"

namespace ttvi {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Affine Gaussian subsystem x+ = A x + B u + w with w ~ N(0, diag(noise_std^2)),
/// truncated to state_box; inputs range over input_box.
struct SubsystemDynamics {
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  std::vector<Vec> A;  // state_dim rows of length state_dim
  std::vector<Vec> B;  // state_dim rows of length input_dim
  Vec noise_std;       // per-dimension standard deviation, all > 0
  std::vector<Interval> state_box;
  std::vector<Interval> input_box;
};

struct GridSpec {
  std::vector<std::size_t> cells_per_dim;
  std::vector<std::size_t> inputs_per_dim;
};

/// Uniform-grid geometry of one subsystem; kept alongside the built MDP so
/// labeling can check interval/cell-edge alignment.
struct GridGeometry {
  std::vector<double> lo;
  std::vector<double> width;
  std::vector<std::size_t> cells;

  std::size_t cell_count() const;
  /// Cell index of a point; returns npos when the point lies outside the box.
  /// A point exactly on a cell edge belongs to the upper cell, and the top
  /// edge of the box counts as outside.
  std::size_t locate(std::span<const double> point) const;
};

/// Finite abstraction of one subsystem. States are grid cells in row-major
/// order plus one absorbing out-of-domain sink (sink_index == npos for
/// hand-built models without a sink). Each action stores a dense row-stochastic
/// n_states x n_states matrix.
struct SubsystemMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t sink_index = npos;
  std::vector<Vec> transition;    // per action, row-major n_states*n_states
  std::vector<Vec> cell_centers;  // per non-sink state
  std::vector<Vec> action_values; // per action, the input vector it encodes
  GridGeometry geometry;

  const double* row(std::size_t action, std::size_t state) const {
    return transition[action].data() + state * n_states;
  }
  bool has_sink() const { return sink_index != npos; }
};

/// Grid the dynamics: uniform cell partition of state_box, uniform input grid
/// of input_box, Gaussian transition masses via per-dimension normal CDF
/// differences around the nominal mean A*center + B*input. Mass leaving the
/// box goes to the sink.
SubsystemMdp build_subsystem_mdp(const SubsystemDynamics& dyn, const GridSpec& grid);

/// Atomic proposition over one subsystem: true where output_row * center (or
/// the scalar center for 1-D subsystems) falls in [interval.lo, interval.hi).
struct LabelingPredicate {
  std::string ap_name;
  std::size_t subsystem_index = 0;
  std::optional<Vec> output_row;
  Interval interval;
  bool include_sink = false;
};

struct BoundaryWarning {
  std::string ap_name;
  double endpoint = 0.0;
  double nearest_cell_edge = 0.0;
};

/// Indicator vector over mdp states. Appends a warning per interval endpoint
/// that does not coincide with a grid-cell edge (classification then follows
/// cell centers, boundary points belonging to the upper cell).
Vec build_indicator(const LabelingPredicate& pred, const SubsystemMdp& mdp,
                    std::vector<BoundaryWarning>* warnings = nullptr);

/// All predicates of a system with their per-subsystem indicator vectors and
/// the induced letter map. AP order is declaration order.
struct Labeling {
  std::vector<std::string> ap_names;
  std::vector<std::size_t> owner;  // per AP, owning subsystem
  std::vector<Vec> indicators;     // per AP, over the owner's states

  std::size_t n_aps() const { return ap_names.size(); }
  bool ap_true(std::size_t ap, std::size_t state) const {
    return indicators[ap][state] != 0.0;
  }
  /// Letter (bitmask, declaration order) of a joint state given one state
  /// index per subsystem.
  Letter letter(std::span<const std::size_t> states) const;
};

Labeling build_labeling(const std::vector<LabelingPredicate>& preds,
                        const std::vector<SubsystemMdp>& mdps,
                        std::vector<BoundaryWarning>* warnings = nullptr);

/// Set of AP names true at a joint state (union of per-subsystem labels).
std::set<std::string> label_letter(std::span<const std::size_t> states,
                                   const Labeling& labeling);

}  // namespace ttvi
