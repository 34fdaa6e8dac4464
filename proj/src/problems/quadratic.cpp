#include <algorithm>
#include <cmath>

#include "apam/problems.hpp"
#include "apam/rng.hpp"

namespace apam {

QuadraticProblem::QuadraticProblem(DenseVec a, DenseVec b, std::vector<DenseVec> shifts)
    : Problem(a.size()), a_(std::move(a)), b_(std::move(b)), shifts_(std::move(shifts)) {
  require_same_size(a_.size(), b_.size(), "quadratic: b");
  for (double ai : a_) {
    if (!(ai >= 0.0)) throw std::invalid_argument("quadratic: A-diag must be >= 0");
  }
  if (shifts_.empty()) shifts_.assign(1, DenseVec(a_.size(), 0.0));
  DenseVec total(a_.size(), 0.0);
  for (const auto& s : shifts_) {
    require_same_size(s.size(), a_.size(), "quadratic: shift");
    for (std::size_t i = 0; i < s.size(); ++i) total[i] += s[i];
  }
  for (double t : total) {
    if (std::abs(t) > 1e-9 * static_cast<double>(shifts_.size())) {
      throw std::invalid_argument("quadratic: sample shifts must sum to zero");
    }
  }
}

double QuadraticProblem::full_value(std::span<const double> x) const {
  check_dim(x);
  // Neumaier summation keeps central differences accurate at large n.
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = 0.5 * a_[i] * x[i] * x[i] - b_[i] * x[i];
    const double u = s + t;
    c += std::abs(s) >= std::abs(t) ? (s - u) + t : (t - u) + s;
    s = u;
  }
  return s + c;
}

DenseVec QuadraticProblem::full_grad(std::span<const double> x) const {
  check_dim(x);
  DenseVec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = a_[i] * x[i] - b_[i];
  return g;
}

DenseVec QuadraticProblem::sample_grad(std::span<const double> x,
                                       std::span<const std::size_t> samples) const {
  check_dim(x);
  if (samples.empty()) throw std::invalid_argument("quadratic: empty sample set");
  DenseVec mean_shift(x.size(), 0.0);
  for (std::size_t j : samples) {
    const auto& s = shifts_.at(j);
    for (std::size_t i = 0; i < x.size(); ++i) mean_shift[i] += s[i];
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  DenseVec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = a_[i] * x[i] - b_[i] - mean_shift[i] * inv;
  return g;
}

DenseVec QuadraticProblem::initial_point(std::uint64_t seed) const {
  Rng rng(mix64(seed ^ 0x51ED2701ULL));
  DenseVec x(dimension());
  for (double& xi : x) xi = rng.normal();
  return project_box(x, box());
}

DenseVec QuadraticProblem::minimizer() const {
  const auto& bx = box();
  DenseVec x(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (a_[i] > 0.0) {
      x[i] = std::clamp(b_[i] / a_[i], bx.lower[i], bx.upper[i]);
    } else if (b_[i] > 0.0) {
      x[i] = bx.upper[i];
    } else if (b_[i] < 0.0) {
      x[i] = bx.lower[i];
    } else {
      x[i] = std::clamp(0.0, bx.lower[i], bx.upper[i]);
    }
    if (!std::isfinite(x[i])) throw std::domain_error("quadratic: unbounded below on this box");
  }
  return x;
}

double QuadraticProblem::optimal_value() const { return full_value(minimizer()); }

double QuadraticProblem::lipschitz() const {
  double l = 0.0;
  for (double ai : a_) l = std::max(l, ai);
  return l;
}

namespace {
// max over x_i in [lo, hi] of |a x_i - c|
double max_abs_affine(double a, double c, double lo, double hi) {
  return std::max(std::abs(a * lo - c), std::abs(a * hi - c));
}
}  // namespace

double QuadraticProblem::grad_inf_bound() const {
  const auto& bx = box();
  if (!bx.is_bounded()) return kInf;
  double g = 0.0;
  for (const auto& s : shifts_) {
    for (std::size_t i = 0; i < a_.size(); ++i) {
      g = std::max(g, max_abs_affine(a_[i], b_[i] + s[i], bx.lower[i], bx.upper[i]));
    }
  }
  return g;
}

double QuadraticProblem::grad_l1_bound() const {
  const auto& bx = box();
  if (!bx.is_bounded()) return kInf;
  // The mean over samples of sum_i |a_i x_i - c_ji| is separable in i and
  // convex in x_i, so its sup over [lo_i, hi_i] sits at an endpoint.
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(shifts_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) {
    double at_lo = 0.0, at_hi = 0.0;
    for (const auto& s : shifts_) {
      at_lo += std::abs(a_[i] * bx.lower[i] - b_[i] - s[i]);
      at_hi += std::abs(a_[i] * bx.upper[i] - b_[i] - s[i]);
    }
    total += std::max(at_lo, at_hi) * inv;
  }
  return total;
}

std::unique_ptr<QuadraticProblem> quadratic(DenseVec a, DenseVec b) {
  return std::make_unique<QuadraticProblem>(std::move(a), std::move(b), std::vector<DenseVec>{});
}

std::unique_ptr<QuadraticProblem> quadratic(DenseVec a, DenseVec b,
                                            std::vector<DenseVec> shifts) {
  return std::make_unique<QuadraticProblem>(std::move(a), std::move(b), std::move(shifts));
}

std::unique_ptr<QuadraticProblem> synth_quadratic(std::size_t n, std::size_t samples,
                                                  double linear_fraction, double noise,
                                                  std::uint64_t seed) {
  if (n == 0 || samples == 0) throw std::invalid_argument("synth_quadratic: n and samples must be >= 1");
  if (!(linear_fraction >= 0.0 && linear_fraction <= 1.0)) {
    throw std::invalid_argument("synth_quadratic: linear_fraction must lie in [0, 1]");
  }
  if (!(noise >= 0.0)) throw std::invalid_argument("synth_quadratic: noise must be >= 0");
  Rng rng(mix64(seed ^ 0x0BADC0DEULL));
  const auto n_linear = static_cast<std::size_t>(std::round(linear_fraction * static_cast<double>(n)));
  DenseVec a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    if (i < n_linear) {
      a[i] = 0.0;
      b[i] = sign * (0.5 + rng.uniform());
    } else {
      a[i] = 0.5 + 1.5 * rng.uniform();
      b[i] = sign * rng.uniform() * a[i];
    }
  }
  std::vector<DenseVec> shifts(samples, DenseVec(n, 0.0));
  if (samples > 1) {
    DenseVec mean(n, 0.0);
    for (auto& s : shifts) {
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = noise * rng.normal();
        mean[i] += s[i];
      }
    }
    for (auto& s : shifts) {
      for (std::size_t i = 0; i < n; ++i) s[i] -= mean[i] / static_cast<double>(samples);
    }
  }
  auto q = quadratic(std::move(a), std::move(b), std::move(shifts));
  q->set_box(BoxConstraint::uniform(n, -1.0, 1.0));
  return q;
}

}  // namespace apam
