#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "apam/vectormath.hpp"
#include "support/oracles.hpp"

using namespace apam;

TEST_CASE("safe_div treats 0/0 as 0") {
  CHECK(safe_div(DenseVec{0.0}, DenseVec{0.0}) == DenseVec{0.0});
  CHECK(safe_div(DenseVec{3.0, -2.0}, DenseVec{1.0, 1.0}) == DenseVec{3.0, -2.0});
}

TEST_CASE("safe_div rejects nonzero over zero and negative divisors") {
  CHECK_THROWS_AS(safe_div(DenseVec{1.0}, DenseVec{0.0}), std::domain_error);
  CHECK_THROWS_AS(safe_div(DenseVec{1.0}, DenseVec{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(safe_div(DenseVec{1.0, 2.0}, DenseVec{1.0}), std::invalid_argument);
}

TEST_CASE("safe_div matches a scalar loop on random positive divisors") {
  oracle::Gen gen(11);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + gen.index(20);
    const DenseVec a = gen.vec(n, -5, 5), b = gen.vec(n, 1e-3, 5);
    const DenseVec out = safe_div(a, b);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] / b[i]);
    CHECK(safe_div(a, DenseVec(n, 1.0)) == a);
  }
}

TEST_CASE("weighted_norm_sq") {
  CHECK(weighted_norm_sq(DenseVec{1, 2}, DenseVec{1, 1}) == 5.0);
  CHECK(weighted_norm_sq(DenseVec{1, 2}, DenseVec{0, 0}) == 0.0);
  CHECK(weighted_norm_sq(DenseVec{2, 3}, DenseVec{0.25, 4}) == 37.0);
  CHECK_THROWS_AS(weighted_norm_sq(DenseVec{1}, DenseVec{1, 2}), std::invalid_argument);

  oracle::Gen gen(12);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + gen.index(30);
    const DenseVec x = gen.vec(n, -3, 3), v = gen.vec(n, 0, 4);
    const double lhs = weighted_norm_sq(x, v);
    const double rhs = norm_sq(hadamard(sqrt_vec(v), x));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("project_box clamps, is idempotent and non-expansive") {
  CHECK(project_box(DenseVec{0.5}, BoxConstraint::uniform(1, -1, 1)) == DenseVec{0.5});
  CHECK(project_box(DenseVec{1.5, -3}, BoxConstraint::uniform(2, -1, 1)) == DenseVec{1, -1});
  CHECK(project_box(DenseVec{1e300, -1e300}, BoxConstraint::unconstrained(2)) == DenseVec{1e300, -1e300});

  oracle::Gen gen(13);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + gen.index(10);
    DenseVec lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = gen.uniform(-2, 0);
      hi[i] = lo[i] + gen.uniform(0, 2);
    }
    const BoxConstraint box(lo, hi);
    const DenseVec x = gen.vec(n, -4, 4), y = gen.vec(n, -4, 4);
    const DenseVec px = project_box(x, box);
    CHECK(box.contains(px));
    CHECK(project_box(px, box) == px);
    CHECK(norm2(sub(px, project_box(y, box))) <= norm2(sub(x, y)) + 1e-15);
  }
}

TEST_CASE("project_box agrees with a grid search of the weighted distance") {
  oracle::Gen gen(14);
  const BoxConstraint box = BoxConstraint::uniform(2, -1, 1);
  const double step = 1e-3;
  for (int t = 0; t < 5; ++t) {
    const DenseVec x = gen.vec(2, -2, 2);
    const DenseVec v = gen.vec(2, 0.1, 3);
    DenseVec best{0, 0};
    // Separable objective: search each coordinate on its own grid.
    for (std::size_t i = 0; i < 2; ++i) {
      double bd = kInf;
      for (double y = -1.0; y <= 1.0 + 1e-12; y += step) {
        const double d = v[i] * (y - x[i]) * (y - x[i]);
        if (d < bd) {
          bd = d;
          best[i] = y;
        }
      }
    }
    const DenseVec p = project_box(x, box);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p[i] - best[i]) <= step);
  }
}

TEST_CASE("component-wise helpers") {
  CHECK(max_vec(DenseVec{1, 5}, DenseVec{3, 2}) == DenseVec{3, 5});
  CHECK(sqrt_vec(DenseVec{4, 9}) == DenseVec{2, 3});
  CHECK(hadamard(DenseVec{2, 3}, DenseVec{4, 5}) == DenseVec{8, 15});
  CHECK(axpy(2.0, DenseVec{1, 2}, DenseVec{10, 20}) == DenseVec{12, 24});
  CHECK_THROWS_AS(sqrt_vec(DenseVec{-1}), std::domain_error);
  CHECK(norm1(DenseVec{1, -2, 3}) == 6.0);
  CHECK(norm_inf(DenseVec{1, -5, 3}) == 5.0);
  CHECK(count_nonzero(DenseVec{0, 1, 0, -2}) == 2);
  CHECK_FALSE(all_finite(DenseVec{1, NAN}));
}

TEST_CASE("SparseVec construction and arithmetic") {
  const SparseVec s = SparseVec::from_pairs({1, 4}, {2.0, -1.0});
  CHECK(s.to_dense(5) == DenseVec{0, 2, 0, 0, -1});
  CHECK(s.dot(DenseVec{1, 1, 1, 1, 1}) == 1.0);
  DenseVec out(5, 1.0);
  s.axpy_into(2.0, out);
  CHECK(out == DenseVec{1, 5, 1, 1, -1});
  CHECK(SparseVec::from_pairs({0, 2}, {0.0, 3.0}).nnz() == 1);
  CHECK_THROWS(SparseVec::from_pairs({2, 1}, {1.0, 1.0}));
  CHECK_THROWS(SparseVec::from_pairs({1, 1}, {1.0, 1.0}));
  CHECK(SparseVec::from_dense(DenseVec{0, 3, 0}) == SparseVec::from_pairs({1}, {3.0}));
}

TEST_CASE("BoxConstraint") {
  CHECK_THROWS(BoxConstraint(DenseVec{1}, DenseVec{0}));
  CHECK_FALSE(BoxConstraint::unconstrained(3).is_bounded());
  CHECK(BoxConstraint::uniform(3, -1, 2).diameter_inf() == 3.0);
  CHECK(std::isinf(BoxConstraint::unconstrained(2).diameter_inf()));
}
