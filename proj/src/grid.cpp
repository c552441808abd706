#include "ttvi/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace ttvi {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void validate_dynamics(const SubsystemDynamics& dyn) {
  if (dyn.state_dim == 0) throw std::invalid_argument("state_dim must be positive");
  if (dyn.A.size() != dyn.state_dim || dyn.B.size() != dyn.state_dim)
    throw std::invalid_argument("A/B row count must equal state_dim");
  for (const auto& r : dyn.A)
    if (r.size() != dyn.state_dim) throw std::invalid_argument("A must be state_dim x state_dim");
  for (const auto& r : dyn.B)
    if (r.size() != dyn.input_dim) throw std::invalid_argument("B must be state_dim x input_dim");
  if (dyn.noise_std.size() != dyn.state_dim)
    throw std::invalid_argument("noise_std must have one entry per state dimension");
  for (double s : dyn.noise_std)
    if (!(s > 0.0)) throw std::invalid_argument("noise_std entries must be positive");
  if (dyn.state_box.size() != dyn.state_dim || dyn.input_box.size() != dyn.input_dim)
    throw std::invalid_argument("box dimension mismatch");
  for (const auto& iv : dyn.state_box)
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("degenerate state interval");
  for (const auto& iv : dyn.input_box)
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("degenerate input interval");
}

void validate_grid(const SubsystemDynamics& dyn, const GridSpec& grid) {
  if (grid.cells_per_dim.size() != dyn.state_dim)
    throw std::invalid_argument("cells_per_dim size must equal state_dim");
  if (grid.inputs_per_dim.size() != dyn.input_dim)
    throw std::invalid_argument("inputs_per_dim size must equal input_dim");
  for (std::size_t c : grid.cells_per_dim)
    if (c == 0) throw std::invalid_argument("cells_per_dim entries must be >= 1");
  for (std::size_t c : grid.inputs_per_dim)
    if (c == 0) throw std::invalid_argument("inputs_per_dim entries must be >= 1");
}

}  // namespace

std::size_t GridGeometry::cell_count() const {
  std::size_t n = 1;
  for (std::size_t c : cells) n *= c;
  return n;
}

std::size_t GridGeometry::locate(std::span<const double> point) const {
  if (point.size() != cells.size()) throw std::invalid_argument("point dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    double rel = (point[k] - lo[k]) / width[k];
    if (rel < 0.0) return npos;
    auto idx = static_cast<std::size_t>(std::floor(rel));
    if (idx >= cells[k]) return npos;
    flat = flat * cells[k] + idx;
  }
  return flat;
}

SubsystemMdp build_subsystem_mdp(const SubsystemDynamics& dyn, const GridSpec& grid) {
  validate_dynamics(dyn);
  validate_grid(dyn, grid);

  const std::size_t d = dyn.state_dim;
  SubsystemMdp mdp;
  mdp.geometry.cells = grid.cells_per_dim;
  mdp.geometry.lo.resize(d);
  mdp.geometry.width.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    mdp.geometry.lo[k] = dyn.state_box[k].lo;
    mdp.geometry.width[k] =
        (dyn.state_box[k].hi - dyn.state_box[k].lo) / static_cast<double>(grid.cells_per_dim[k]);
  }

  const std::size_t n_cells = mdp.geometry.cell_count();
  mdp.n_states = n_cells + 1;
  mdp.sink_index = n_cells;

  // Cell centers in row-major multi-index order.
  mdp.cell_centers.resize(n_cells);
  {
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t c = 0; c < n_cells; ++c) {
      Vec center(d);
      for (std::size_t k = 0; k < d; ++k)
        center[k] = mdp.geometry.lo[k] + (static_cast<double>(idx[k]) + 0.5) * mdp.geometry.width[k];
      mdp.cell_centers[c] = std::move(center);
      for (std::size_t k = d; k-- > 0;) {
        if (++idx[k] < grid.cells_per_dim[k]) break;
        idx[k] = 0;
      }
    }
  }

  // Input grid: a single point sits at the interval midpoint, otherwise the
  // points are evenly spaced with the endpoints included.
  mdp.n_actions = 1;
  for (std::size_t c : grid.inputs_per_dim) mdp.n_actions *= c;
  mdp.action_values.resize(mdp.n_actions);
  {
    std::vector<std::size_t> idx(dyn.input_dim, 0);
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      Vec u(dyn.input_dim);
      for (std::size_t k = 0; k < dyn.input_dim; ++k) {
        const auto& iv = dyn.input_box[k];
        const std::size_t c = grid.inputs_per_dim[k];
        u[k] = (c == 1) ? 0.5 * (iv.lo + iv.hi)
                        : iv.lo + (iv.hi - iv.lo) * static_cast<double>(idx[k]) /
                                      static_cast<double>(c - 1);
      }
      mdp.action_values[a] = std::move(u);
      for (std::size_t k = dyn.input_dim; k-- > 0;) {
        if (++idx[k] < grid.inputs_per_dim[k]) break;
        idx[k] = 0;
      }
    }
  }

  for (std::size_t a = 0; a < mdp.n_actions; ++a)
    mdp.transition.emplace_back(mdp.n_states * mdp.n_states, 0.0);

  for (std::size_t a = 0; a < mdp.n_actions; ++a) {
    Vec& mat = mdp.transition[a];
    const Vec& u = mdp.action_values[a];
#pragma omp parallel for schedule(static)
    for (long long cl = 0; cl < static_cast<long long>(n_cells); ++cl) {
      const auto c = static_cast<std::size_t>(cl);
      const Vec& x = mdp.cell_centers[c];
      Vec mu(d, 0.0);
      for (std::size_t r = 0; r < d; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += dyn.A[r][k] * x[k];
        for (std::size_t k = 0; k < dyn.input_dim; ++k) s += dyn.B[r][k] * u[k];
        mu[r] = s;
      }
      // Per-dimension masses over the grid bins; products fill the row, the
      // complement of the total in-box mass goes to the sink.
      std::vector<Vec> bin_mass(d);
      double in_mass = 1.0;
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t nk = grid.cells_per_dim[k];
        bin_mass[k].resize(nk);
        double prev = normal_cdf((mdp.geometry.lo[k] - mu[k]) / dyn.noise_std[k]);
        const double first = prev;
        for (std::size_t b = 0; b < nk; ++b) {
          double edge = mdp.geometry.lo[k] + static_cast<double>(b + 1) * mdp.geometry.width[k];
          double cur = normal_cdf((edge - mu[k]) / dyn.noise_std[k]);
          bin_mass[k][b] = cur - prev;
          prev = cur;
        }
        in_mass *= prev - first;
      }
      double* row = mat.data() + c * mdp.n_states;
      std::vector<std::size_t> idx(d, 0);
      for (std::size_t t = 0; t < n_cells; ++t) {
        double p = 1.0;
        for (std::size_t k = 0; k < d; ++k) p *= bin_mass[k][idx[k]];
        row[t] = p;
        for (std::size_t k = d; k-- > 0;) {
          if (++idx[k] < grid.cells_per_dim[k]) break;
          idx[k] = 0;
        }
      }
      row[mdp.sink_index] = std::max(0.0, 1.0 - in_mass);
    }
    // Absorbing sink.
    mat[mdp.sink_index * mdp.n_states + mdp.sink_index] = 1.0;
  }
  return mdp;
}

Vec build_indicator(const LabelingPredicate& pred, const SubsystemMdp& mdp,
                    std::vector<BoundaryWarning>* warnings) {
  const std::size_t d = mdp.geometry.cells.size();
  Vec out_row;
  if (pred.output_row) {
    if (pred.output_row->size() != d)
      throw std::invalid_argument("output_row length must equal the subsystem state dimension");
    out_row = *pred.output_row;
  } else {
    if (d != 1)
      throw std::invalid_argument("predicate '" + pred.ap_name +
                                  "' needs an output_row for a multi-dimensional subsystem");
    out_row = {1.0};
  }

  if (warnings != nullptr) {
    // An interval endpoint aligned with the grid maps, through the output row,
    // onto a cell edge in some dimension. Only axis-aligned rows are checked.
    std::size_t axis = npos;
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < d; ++k)
      if (out_row[k] != 0.0) {
        ++nonzero;
        axis = k;
      }
    if (nonzero == 1) {
      const double scale = out_row[axis];
      for (double endpoint : {pred.interval.lo, pred.interval.hi}) {
        double coord = endpoint / scale;
        double rel = (coord - mdp.geometry.lo[axis]) / mdp.geometry.width[axis];
        double nearest = std::round(rel);
        if (std::abs(rel - nearest) > 1e-9) {
          double edge = mdp.geometry.lo[axis] + nearest * mdp.geometry.width[axis];
          warnings->push_back({pred.ap_name, endpoint, edge * scale});
        }
      }
    }
  }

  Vec ind(mdp.n_states, 0.0);
  const std::size_t n_cells = mdp.cell_centers.size();
  for (std::size_t c = 0; c < n_cells; ++c) {
    double y = 0.0;
    for (std::size_t k = 0; k < d; ++k) y += out_row[k] * mdp.cell_centers[c][k];
    if (y >= pred.interval.lo && y < pred.interval.hi) ind[c] = 1.0;
  }
  if (mdp.has_sink() && pred.include_sink) ind[mdp.sink_index] = 1.0;
  return ind;
}

Letter Labeling::letter(std::span<const std::size_t> states) const {
  Letter l = 0;
  for (std::size_t ap = 0; ap < ap_names.size(); ++ap)
    if (ap_true(ap, states[owner[ap]])) l |= Letter{1} << ap;
  return l;
}

Labeling build_labeling(const std::vector<LabelingPredicate>& preds,
                        const std::vector<SubsystemMdp>& mdps,
                        std::vector<BoundaryWarning>* warnings) {
  if (preds.size() > kMaxAtomicPropositions)
    throw std::invalid_argument("too many atomic propositions");
  Labeling lab;
  for (const auto& p : preds) {
    for (const auto& name : lab.ap_names)
      if (name == p.ap_name)
        throw std::invalid_argument("duplicate atomic proposition name '" + p.ap_name + "'");
    if (p.subsystem_index >= mdps.size())
      throw std::invalid_argument("predicate '" + p.ap_name + "' references unknown subsystem");
    lab.ap_names.push_back(p.ap_name);
    lab.owner.push_back(p.subsystem_index);
    lab.indicators.push_back(build_indicator(p, mdps[p.subsystem_index], warnings));
  }
  return lab;
}

std::set<std::string> label_letter(std::span<const std::size_t> states, const Labeling& labeling) {
  std::set<std::string> out;
  for (std::size_t ap = 0; ap < labeling.n_aps(); ++ap)
    if (labeling.ap_true(ap, states[labeling.owner[ap]])) out.insert(labeling.ap_names[ap]);
  return out;
}

}  // namespace ttvi
