#include <random>

#include "doctest.h"
#include "ttvi/tensor.hpp"

using namespace ttvi;

TEST_CASE("ones tensor reconstructs to all-ones") {
  RankOneTensor t = ones_tensor({2, 2});
  CHECK(t.factors.size() == 2);
  DenseTensor d = reconstruct(t);
  for (double x : d.data) CHECK(x == 1.0);

  RankOneTensor single = ones_tensor({3});
  CHECK(single.factors[0] == Vec{1.0, 1.0, 1.0});

  DenseTensor big = reconstruct(ones_tensor({4, 4, 4, 4}));
  for (double x : big.data) CHECK(x == 1.0);
}

TEST_CASE("single-term reconstruction is the outer product") {
  CpdValue v;
  v.terms.push_back(RankOneTensor{{{0.7, 0.4}, {0.7, 0.4}}});
  DenseTensor d = reconstruct(v, {2, 2});
  CHECK(d.data[0] == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(d.data[1] == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(d.data[2] == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(d.data[3] == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("empty sum reconstructs to zero, duplicate terms double") {
  CpdValue empty;
  DenseTensor z = reconstruct(empty, {3, 2});
  CHECK(z.size() == 6);
  for (double x : z.data) CHECK(x == 0.0);

  RankOneTensor t{{{0.5, 0.2}, {0.3, 0.9}}};
  CpdValue twice;
  twice.terms = {t, t};
  DenseTensor d1 = reconstruct(CpdValue{{t}}, {2, 2});
  DenseTensor d2 = reconstruct(twice, {2, 2});
  for (std::size_t i = 0; i < d1.size(); ++i)
    CHECK(d2.data[i] == doctest::Approx(2.0 * d1.data[i]).epsilon(1e-12));
}

TEST_CASE("reconstruction is additive over term lists") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_term = [&](const std::vector<std::size_t>& shape) {
    RankOneTensor t;
    for (std::size_t n : shape) {
      Vec f(n);
      for (auto& x : f) x = unit(rng);
      t.factors.push_back(std::move(f));
    }
    return t;
  };
  const std::vector<std::size_t> shape{3, 4, 2};
  for (int rep = 0; rep < 20; ++rep) {
    CpdValue a, b, both;
    for (int i = 0; i < 3; ++i) a.terms.push_back(random_term(shape));
    for (int i = 0; i < 2; ++i) b.terms.push_back(random_term(shape));
    both.terms = a.terms;
    both.terms.insert(both.terms.end(), b.terms.begin(), b.terms.end());
    DenseTensor da = reconstruct(a, shape), db = reconstruct(b, shape),
                dboth = reconstruct(both, shape);
    for (std::size_t i = 0; i < dboth.size(); ++i)
      CHECK(dboth.data[i] == doctest::Approx(da.data[i] + db.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("max_value equals the dense maximum for nonnegative tensors") {
  CHECK(max_value(RankOneTensor{{{0.5, 0.3}, {0.6, 0.2}}}) == doctest::Approx(0.30));
  CHECK(max_value(ones_tensor({5, 3, 2})) == 1.0);
  CHECK(max_value(RankOneTensor{{{0.0}, {0.9}}}) == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    RankOneTensor t;
    for (std::size_t n : {5u, 5u, 5u}) {
      Vec f(n);
      for (auto& x : f) x = unit(rng);
      t.factors.push_back(std::move(f));
    }
    DenseTensor d = reconstruct(t);
    double dense_max = 0.0;
    for (double x : d.data) dense_max = std::max(dense_max, x);
    CHECK(max_value(t) == doctest::Approx(dense_max).epsilon(1e-12));
  }
}

TEST_CASE("max_value rejects negative entries") {
  CHECK_THROWS_AS(max_value(RankOneTensor{{{0.5, -0.1}}}), std::invalid_argument);
}

TEST_CASE("l1 norm") {
  CHECK(l1_norm({0.7, 0.4}) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(l1_norm({0.0, 0.0, 0.0}) == 0.0);
  CHECK(l1_norm(Vec(17, 1.0)) == 17.0);
  CHECK(l1_norm({-0.5, 0.25}) == doctest::Approx(0.75));
}

TEST_CASE("scalar accounting counts factor entries") {
  CpdValue v;
  v.terms.push_back(ones_tensor({4, 7}));
  v.terms.push_back(ones_tensor({4, 7}));
  v.terms.push_back(ones_tensor({4, 7}));
  CHECK(v.scalar_count() == 3 * (4 + 7));
}

TEST_CASE("dense cap rejects oversized reconstructions") {
  CpdValue v;
  v.terms.push_back(ones_tensor({100, 100}));
  CHECK_THROWS_AS(reconstruct(v, {100, 100}, 9999), std::invalid_argument);
}

TEST_CASE("value_at indexes the represented tensor") {
  RankOneTensor t{{{0.5, 0.25}, {0.1, 0.2, 0.4}}};
  std::vector<std::size_t> idx{1, 2};
  CHECK(t.value_at(idx) == doctest::Approx(0.25 * 0.4).epsilon(1e-15));
  CpdValue v;
  v.terms = {t, t};
  CHECK(v.value_at(idx) == doctest::Approx(2 * 0.25 * 0.4).epsilon(1e-15));
}
