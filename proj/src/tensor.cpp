#include "ttvi/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ttvi {

std::size_t RankOneTensor::scalar_count() const {
  std::size_t n = 0;
  for (const auto& f : factors) n += f.size();
  return n;
}

double RankOneTensor::value_at(std::span<const std::size_t> index) const {
  if (index.size() != factors.size())
    throw std::invalid_argument("rank-1 index order mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < factors.size(); ++i) p *= factors[i].at(index[i]);
  return p;
}

std::size_t CpdValue::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : terms) n += t.scalar_count();
  return n;
}

double CpdValue::value_at(std::span<const std::size_t> index) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.value_at(index);
  return s;
}

double& DenseTensor::at(std::span<const std::size_t> index) {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) flat = flat * shape[i] + index[i];
  return data[flat];
}

double DenseTensor::at(std::span<const std::size_t> index) const {
  return const_cast<DenseTensor*>(this)->at(index);
}

RankOneTensor ones_tensor(const std::vector<std::size_t>& sizes) {
  RankOneTensor t;
  t.factors.reserve(sizes.size());
  for (std::size_t n : sizes) t.factors.emplace_back(n, 1.0);
  return t;
}

double max_value(const RankOneTensor& t) {
  double p = 1.0;
  for (const auto& f : t.factors) {
    double m = 0.0;
    for (double x : f) {
      if (x < 0.0) throw std::invalid_argument("max_value requires nonnegative factors");
      if (x > m) m = x;
    }
    p *= m;
  }
  return p;
}

double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (std::size_t n : shape) {
    if (n == 0) throw std::invalid_argument("zero-sized tensor mode");
    if (p > std::numeric_limits<std::size_t>::max() / n)
      throw std::overflow_error("tensor shape product overflows");
    p *= n;
  }
  return p;
}

namespace {

// Accumulate coef * outer(factors) into out, recursing over modes.
void accumulate_outer(const RankOneTensor& t, std::size_t mode, std::size_t offset,
                      double coef, DenseTensor& out) {
  const Vec& f = t.factors[mode];
  if (mode + 1 == t.factors.size()) {
    double* dst = out.data.data() + offset * f.size();
    for (std::size_t i = 0; i < f.size(); ++i) dst[i] += coef * f[i];
    return;
  }
  for (std::size_t i = 0; i < f.size(); ++i)
    accumulate_outer(t, mode + 1, offset * f.size() + i, coef * f[i], out);
}

}  // namespace

DenseTensor reconstruct(const CpdValue& v, const std::vector<std::size_t>& shape,
                        std::size_t dense_cap) {
  std::size_t n = shape_product(shape);
  if (n > dense_cap)
    throw std::invalid_argument("dense reconstruction of " + std::to_string(n) +
                                " entries exceeds cap " + std::to_string(dense_cap));
  DenseTensor out{shape, Vec(n, 0.0)};
  for (const auto& term : v.terms) {
    if (term.factors.size() != shape.size())
      throw std::invalid_argument("CPD term order mismatch");
    for (std::size_t i = 0; i < shape.size(); ++i)
      if (term.factors[i].size() != shape[i])
        throw std::invalid_argument("CPD term factor length mismatch");
    accumulate_outer(term, 0, 0, 1.0, out);
  }
  return out;
}

DenseTensor reconstruct(const RankOneTensor& t, std::size_t dense_cap) {
  std::vector<std::size_t> shape;
  shape.reserve(t.factors.size());
  for (const auto& f : t.factors) shape.push_back(f.size());
  CpdValue v;
  v.terms.push_back(t);
  return reconstruct(v, shape, dense_cap);
}

}  // namespace ttvi
