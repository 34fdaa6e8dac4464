#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <string>

#include "apam/optimizer.hpp"
#include "apam/problems.hpp"
#include "support/oracles.hpp"

using namespace apam;

TEST_CASE("libsvm line grammar") {
  std::vector<std::string> warnings;
  const Dataset d = parse_libsvm("-1 3:0.5 7:1.2\n\n+1 1:1\n", [&](const std::string& w) { warnings.push_back(w); });
  REQUIRE(d.size() == 2);
  CHECK(d.labels[0] == -1);
  CHECK(d.rows[0] == SparseVec::from_pairs({2, 6}, {0.5, 1.2}));
  CHECK(d.n_features == 7);
  CHECK(d.is_binary());
  CHECK(warnings.size() == 1);
}

TEST_CASE("libsvm errors carry line numbers") {
  try {
    parse_libsvm("+1 1:0.5\n-1 3:abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_libsvm("+1 3:1 2:1\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm(""), ParseError);
  CHECK_THROWS_AS(parse_libsvm("x 1:1\n"), ParseError);
}

TEST_CASE("libsvm reads the largest index as the feature count") {
  const Dataset d = parse_libsvm("+1 5:1 47236:0.5\n-1 1:1\n");
  CHECK(d.n_features == 47236);
}

TEST_CASE("libsvm file round trip") {
  const Dataset d = load_libsvm(std::string(APAM_TEST_DATA) + "/tiny.libsvm");
  CHECK(d.size() == 4);
  CHECK(d.n_features == 4);
  CHECK(parse_libsvm(format_libsvm(d)) == d);
  const Dataset s = synth_classification(50, 6, false, 3);
  CHECK(parse_libsvm(format_libsvm(s)) == s);
  CHECK_THROWS(load_libsvm("/nonexistent/file.libsvm"));
}

TEST_CASE("synthetic data is deterministic and balanced") {
  CHECK(synth_classification(100, 5, true, 9) == synth_classification(100, 5, true, 9));
  CHECK_FALSE(synth_classification(100, 5, true, 9) == synth_classification(100, 5, true, 10));
  const Dataset big = synth_classification(10000, 5, false, 4);
  const long pos = std::count(big.labels.begin(), big.labels.end(), 1);
  CHECK(std::abs(static_cast<double>(pos) / 10000.0 - 0.5) <= 0.05);
  const Dataset mc = synth_classification(200, 4, false, 4, 3);
  CHECK(mc.n_classes == 3);
}

TEST_CASE("separable synthetic data is fit with zero training error") {
  const Dataset d = synth_classification(200, 5, true, 5);
  auto p = logistic(d, 0.0);
  HyperParams hp;
  hp.schedule = LrSchedule::constant(0.05);
  const SerialRun r = run_serial(*p, hp, 3000, 32, 1, DenseVec(5, 0.0));
  std::size_t errors = 0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (d.labels[j] * d.rows[j].dot(r.final_state.x) <= 0) ++errors;
  }
  CHECK(errors == 0);
}

TEST_CASE("logistic basics") {
  const Dataset d = synth_classification(40, 6, false, 6);
  auto p = logistic(d, 0.0);
  const DenseVec zero(6, 0.0);
  CHECK(p->full_value(zero) == doctest::Approx(std::log(2.0)));
  DenseVec expect(6, 0.0);
  for (std::size_t j = 0; j < d.size(); ++j) d.rows[j].axpy_into(-0.5 * d.labels[j] / 40.0, expect);
  const DenseVec g = p->full_grad(zero);
  for (std::size_t i = 0; i < 6; ++i) CHECK(g[i] == doctest::Approx(expect[i]).epsilon(1e-12));

  oracle::Gen gen(41);
  auto pr = logistic(d, 0.01);
  for (int t = 0; t < 10; ++t) CHECK(grad_check(*pr, gen.normal_vec(6)) <= 1e-5);
  CHECK_THROWS(logistic(synth_classification(10, 3, false, 1, 3), 0.0));
}

TEST_CASE("logistic on one separable sample decreases to zero along the margin") {
  Dataset d;
  d.rows = {SparseVec::from_pairs({0}, {1.0})};
  d.labels = {1};
  d.n_features = 1;
  d.n_classes = 2;
  auto p = logistic(d, 0.0);
  double prev = p->full_value(DenseVec{0.0});
  for (double t = 1; t <= 40; t += 1) {
    const double f = p->full_value(DenseVec{t});
    CHECK(f < prev);
    prev = f;
  }
  CHECK(prev < 1e-15);
}

TEST_CASE("logistic is convex along random segments") {
  const Dataset d = synth_classification(60, 4, false, 7);
  auto p = logistic(d, 0.001);
  oracle::Gen gen(42);
  for (int t = 0; t < 100; ++t) {
    const DenseVec x = gen.normal_vec(4, 3), y = gen.normal_vec(4, 3);
    const double lam = gen.uniform(0, 1);
    const DenseVec z = axpy(lam, sub(x, y), y);
    CHECK(p->full_value(z) <= lam * p->full_value(x) + (1 - lam) * p->full_value(y) + 1e-9);
  }
}

TEST_CASE("epoch partition of sample gradients averages to the full gradient") {
  oracle::Gen gen(43);
  const Dataset d = synth_classification(103, 7, false, 8);
  auto lr = logistic(d, 0.01);
  auto net = mlp2(synth_classification(45, 4, false, 8, 3), 5, 2);
  for (const Problem* p : {static_cast<const Problem*>(lr.get()), static_cast<const Problem*>(net.get())}) {
    const DenseVec x = gen.normal_vec(p->dimension(), 0.5);
    const std::size_t N = p->num_samples(), b = 10;
    DenseVec acc(p->dimension(), 0.0);
    for (std::size_t start = 0; start < N; start += b) {
      std::vector<std::size_t> idx(std::min(b, N - start));
      std::iota(idx.begin(), idx.end(), start);
      const DenseVec g = p->sample_grad(x, idx);
      const double w = static_cast<double>(idx.size()) / static_cast<double>(N);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * g[i];
    }
    const DenseVec full = p->full_grad(x);
    for (std::size_t i = 0; i < acc.size(); ++i) CHECK(std::abs(acc[i] - full[i]) <= 1e-10);
  }
}

TEST_CASE("minibatch gradients are reproducible per seed") {
  auto p = logistic(synth_classification(50, 4, false, 9), 0.0);
  const DenseVec x(4, 0.1);
  CHECK(p->minibatch_grad(x, 8, 5) == p->minibatch_grad(x, 8, 5));
  CHECK_FALSE(p->minibatch_grad(x, 8, 5) == p->minibatch_grad(x, 8, 6));
}

TEST_CASE("mlp2 layout, zero parameters and gradients") {
  Mlp2Layout lay{4, 3, 2};
  CHECK(lay.size() == 3 * 4 + 3 + 2 * 3 + 2);
  const Dataset d = synth_classification(5, 4, false, 10, 2);
  auto p = mlp2(d, 3, 1);
  CHECK(p->dimension() == lay.size());
  CHECK(p->full_value(DenseVec(lay.size(), 0.0)) == doctest::Approx(std::log(2.0)));
  CHECK(grad_check(*p, p->initial_point(3)) <= 1e-5);

  auto p3 = mlp2(synth_classification(30, 5, false, 11, 3), 4, 1);
  CHECK(p3->full_value(DenseVec(p3->dimension(), 0.0)) == doctest::Approx(std::log(3.0)));
  oracle::Gen gen(44);
  for (int t = 0; t < 5; ++t) CHECK(grad_check(*p3, gen.normal_vec(p3->dimension())) <= 1e-5);
  CHECK_THROWS(p3->full_value(DenseVec(3, 0.0)));
}

TEST_CASE("mlp2 is invariant to duplicating every sample") {
  Dataset d = synth_classification(12, 3, false, 12, 3);
  Dataset dd = d;
  dd.rows.insert(dd.rows.end(), d.rows.begin(), d.rows.end());
  dd.labels.insert(dd.labels.end(), d.labels.begin(), d.labels.end());
  auto a = mlp2(d, 4, 1), b = mlp2(dd, 4, 1);
  const DenseVec x = a->initial_point(2);
  CHECK(a->full_value(x) == doctest::Approx(b->full_value(x)).epsilon(1e-14));
  const DenseVec ga = a->full_grad(x), gb = b->full_grad(x);
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] - gb[i]) <= 1e-14);
}

TEST_CASE("quadratic closed forms") {
  auto q = quadratic({1, 1}, {0, 0});
  CHECK(q->minimizer() == DenseVec{0, 0});
  CHECK(q->optimal_value() == 0.0);
  auto q2 = quadratic({2, 4}, {2, 4});
  CHECK(q2->minimizer() == DenseVec{1, 1});
  CHECK(q2->optimal_value() == doctest::Approx(-3.0));
  CHECK(norm2(q2->full_grad(q2->minimizer())) == 0.0);
  CHECK(q2->lipschitz() == 4.0);
  CHECK_THROWS(quadratic({-1}, {0}));
  CHECK_THROWS(quadratic({1}, {0}, {{1.0}, {0.5}}));

  auto lin = quadratic({0, 1}, {1, 0});
  CHECK_THROWS_AS(lin->minimizer(), std::domain_error);
  lin->set_box(BoxConstraint::uniform(2, -1, 1));
  CHECK(lin->minimizer() == DenseVec{1, 0});
  CHECK(lin->optimal_value() == -1.0);
  CHECK(grad_check(*q2, DenseVec{0.3, -0.2}) <= 1e-9);
}

TEST_CASE("quadratic gradient sup bounds dominate sampled gradients") {
  auto q = synth_quadratic(8, 20, 0.5, 0.4, 3);
  oracle::Gen gen(45);
  for (int t = 0; t < 200; ++t) {
    const DenseVec x = project_box(gen.vec(8, -1.5, 1.5), q->box());
    const DenseVec g = q->sample_grad(x, std::vector<std::size_t>{gen.index(20)});
    CHECK(norm_inf(g) <= q->grad_inf_bound() + 1e-12);
  }
  CHECK(q->minimizer().size() == 8);
  CHECK(grad_check(*q, q->initial_point(1)) <= 1e-9);
}
