#pragma once

#include <span>

#include "ttvi/common.hpp"

namespace ttvi {

/// One factor vector per subsystem; the represented tensor is their outer
/// product. Factor lengths are the per-subsystem state counts (sink included).
struct RankOneTensor {
  std::vector<Vec> factors;

  std::size_t order() const { return factors.size(); }
  std::size_t scalar_count() const;
  /// Entry of the represented tensor at a multi-index (one state per subsystem).
  double value_at(std::span<const std::size_t> index) const;
};

/// Sum of rank-1 terms. The term count is the represented rank; terms are
/// never re-compressed, so reconstruction is exact.
struct CpdValue {
  std::vector<RankOneTensor> terms;

  std::size_t rank() const { return terms.size(); }
  std::size_t scalar_count() const;
  double value_at(std::span<const std::size_t> index) const;
};

/// Row-major dense tensor.
struct DenseTensor {
  std::vector<std::size_t> shape;
  Vec data;

  std::size_t size() const { return data.size(); }
  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;
};

RankOneTensor ones_tensor(const std::vector<std::size_t>& sizes);

/// Maximum entry of the represented tensor: the product of per-factor maxima,
/// valid only when all entries are nonnegative. Throws std::invalid_argument
/// on a negative entry.
double max_value(const RankOneTensor& t);

double l1_norm(const Vec& v);

std::size_t shape_product(const std::vector<std::size_t>& shape);

/// Densify a CPD value. Terms are accumulated in their stored order so the
/// result is identical run to run. Throws when the shape exceeds dense_cap.
DenseTensor reconstruct(const CpdValue& v, const std::vector<std::size_t>& shape,
                        std::size_t dense_cap = kDefaultDenseCap);

DenseTensor reconstruct(const RankOneTensor& t, std::size_t dense_cap = kDefaultDenseCap);

}  // namespace ttvi
