#include <doctest.h>

#include <cmath>

#include "apam/optimizer.hpp"
#include "support/oracles.hpp"

using namespace apam;

namespace {

HyperParams default_hp(LrSchedule s = LrSchedule::constant(0.1)) {
  HyperParams hp;
  hp.schedule = s;
  return hp;
}

}  // namespace

TEST_CASE("alpha_at") {
  CHECK(alpha_at(LrSchedule::const_over_sqrt_k(1.0, 4), 3) == doctest::Approx(0.5));
  CHECK(alpha_at(LrSchedule::inv_sqrt_k(2.0), 4) == doctest::Approx(1.0));
  CHECK(alpha_at(LrSchedule::inv_sqrt_k(1.0), 1) == 1.0);
  CHECK(alpha_at(LrSchedule::constant(0.3), 17) == 0.3);
  CHECK_THROWS(alpha_at(LrSchedule::inv_sqrt_k(1.0), 0));
  const auto seq = alpha_sequence(LrSchedule::inv_sqrt_k(1.0), 50);
  for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] <= seq[i - 1]);
}

TEST_CASE("HyperParams validation") {
  HyperParams hp;
  CHECK_NOTHROW(hp.validate());
  hp.beta1 = 1.0;
  CHECK_THROWS(hp.validate());
  hp = HyperParams{};
  hp.beta2 = -0.1;
  CHECK_THROWS(hp.validate());
  hp = HyperParams{};
  hp.eps = -1;
  CHECK_THROWS(hp.validate());
  hp = HyperParams{};
  hp.schedule.alpha = 0;
  CHECK_THROWS(hp.validate());
}

TEST_CASE("first step from a zero state") {
  OptimizerState s = OptimizerState::initial({5.0});
  apply_step(s, DenseVec{2.0}, 0.1, BoxConstraint::unconstrained(1), default_hp());
  CHECK(s.m[0] == doctest::Approx(0.2));
  CHECK(s.v[0] == doctest::Approx(0.004));
  CHECK(s.vhat[0] == doctest::Approx(0.004));
  CHECK(std::abs(s.x[0] - 4.6837722) <= 1e-7);
  CHECK(s.x[0] == doctest::Approx(5.0 - std::sqrt(0.1)).epsilon(1e-14));
  CHECK(s.k == 2);
}

TEST_CASE("zero gradient leaves the state fixed except k") {
  OptimizerState s = OptimizerState::initial({1.0, -2.0});
  const OptimizerState after = step(s, DenseVec{0.0, 0.0}, 0.5, BoxConstraint::unconstrained(2), default_hp());
  CHECK(after.x == s.x);
  CHECK(after.m == s.m);
  CHECK(after.vhat == s.vhat);
  CHECK(after.k == 2);
}

TEST_CASE("freeze rule keeps coordinates with zero vhat") {
  OptimizerState s = OptimizerState::initial({1.0, 1.0});
  apply_step(s, DenseVec{1.0, 0.0}, 0.5, BoxConstraint::unconstrained(2), default_hp());
  CHECK(s.x[0] < 1.0);
  CHECK(s.x[1] == 1.0);
}

TEST_CASE("boundary coordinates stay on the boundary when pushed outward") {
  const auto box = BoxConstraint::uniform(2, -1, 1);
  OptimizerState s = OptimizerState::initial({1.0, -1.0});
  for (int t = 0; t < 10; ++t) apply_step(s, DenseVec{-3.0, 2.0}, 0.2, box, default_hp());
  CHECK(s.x == DenseVec{1.0, -1.0});
}

TEST_CASE("invalid inputs leave the state untouched") {
  OptimizerState s = OptimizerState::initial({1.0});
  const OptimizerState before = s;
  const auto box = BoxConstraint::unconstrained(1);
  CHECK_THROWS(apply_step(s, DenseVec{NAN}, 0.1, box, default_hp()));
  CHECK_THROWS(apply_step(s, DenseVec{1.0, 2.0}, 0.1, box, default_hp()));
  CHECK_THROWS(apply_step(s, DenseVec{1.0}, 0.0, box, default_hp()));
  CHECK(s.x == before.x);
  CHECK(s.m == before.m);
  CHECK(s.k == before.k);
}

TEST_CASE("apply_step matches the scalar reference on random runs") {
  oracle::Gen gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + gen.index(12);
    HyperParams hp = default_hp();
    hp.beta1 = gen.uniform(0, 0.99);
    hp.beta2 = gen.uniform(0, 0.999);
    hp.eps = trial % 4 == 0 ? 1e-8 : 0.0;
    const auto box = trial % 2 ? BoxConstraint::uniform(n, -1, 1) : BoxConstraint::unconstrained(n);
    OptimizerState s = OptimizerState::initial(project_box(gen.vec(n), box));
    oracle::RefState r{s.x, s.m, s.v, s.vhat};
    for (int k = 0; k < 50; ++k) {
      const DenseVec g = gen.sparse_vec(n, 0.6, 2.0);
      const double a = gen.uniform(0.01, 0.5);
      apply_step(s, g, a, box, hp);
      oracle::ref_step(r, g, a, hp.beta1, hp.beta2, box, hp.eps);
    }
    CHECK(s.x == r.x);
    CHECK(s.m == r.m);
    CHECK(s.vhat == r.vhat);
  }
}

TEST_CASE("moment closed form and per-step inequalities on random runs") {
  oracle::Gen gen(22);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + gen.index(8);
    HyperParams hp = default_hp();
    hp.beta1 = gen.uniform(0, 0.95);
    hp.beta2 = gen.uniform(0.5, 0.999);
    const auto box = BoxConstraint::uniform(n, -1, 1);
    OptimizerState s = OptimizerState::initial(project_box(gen.vec(n), box));
    std::vector<DenseVec> gs;
    DenseVec gamma(n, 0.0);
    for (int k = 1; k <= 50; ++k) {
      const DenseVec g = gen.sparse_vec(n, 0.5, 3.0);
      gs.push_back(g);
      for (std::size_t i = 0; i < n; ++i) gamma[i] = std::max(gamma[i], std::abs(g[i]));
      const DenseVec x_prev = s.x, vhat_prev = s.vhat;
      const double a = 0.1 / std::sqrt(k);
      apply_step(s, g, a, box, hp);

      for (std::size_t i = 0; i < n; ++i) {
        double mi = 0.0;
        for (int j = 1; j <= k; ++j) mi += (1 - hp.beta1) * std::pow(hp.beta1, k - j) * gs[j - 1][i];
        CHECK(std::abs(s.m[i] - mi) <= 1e-9);
        CHECK(s.vhat[i] >= vhat_prev[i]);
        CHECK(s.vhat[i] >= s.v[i]);
        CHECK(s.v[i] >= 0.0);
        CHECK(std::abs(s.m[i]) <= gamma[i] + 1e-12);
        CHECK(s.vhat[i] <= gamma[i] * gamma[i] + 1e-12);
      }
      const double step_norm = norm2(sub(s.x, x_prev));
      CHECK(step_norm <= a * norm2(safe_div(s.m, sqrt_vec(s.vhat))) + 1e-9);
      CHECK(box.contains(s.x));
    }
  }
}

TEST_CASE("run_serial is deterministic and descends on a 1-d quadratic") {
  auto q = quadratic({1.0}, {0.0});
  HyperParams hp = default_hp(LrSchedule::constant(0.1));
  const SerialRun r = run_serial(*q, hp, 100, 1, 3, DenseVec{2.0});
  CHECK(r.iterates.size() == 101);
  CHECK(std::abs(r.iterates.back()[0]) < std::abs(r.iterates.front()[0]));
  const SerialRun r2 = run_serial(*q, hp, 100, 1, 3, DenseVec{2.0});
  CHECK(r2.iterates == r.iterates);
}

TEST_CASE("run_serial on a zero-gradient problem keeps x constant") {
  auto q = quadratic({0.0, 0.0}, {0.0, 0.0});
  const SerialRun r = run_serial(*q, default_hp(), 30, 1, 1, DenseVec{0.3, -0.7});
  for (const auto& x : r.iterates) CHECK(x == DenseVec{0.3, -0.7});
}
