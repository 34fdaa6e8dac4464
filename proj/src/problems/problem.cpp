#include <algorithm>
#include <cmath>
#include <numeric>

#include "apam/problems.hpp"
#include "apam/rng.hpp"

namespace apam {

void Problem::set_box(BoxConstraint box) {
  require_same_size(box.size(), dimension(), "Problem::set_box");
  box_ = std::move(box);
}

void Problem::check_dim(std::span<const double> x) const {
  require_same_size(x.size(), dimension(), name().c_str());
}

DenseVec Problem::minibatch_grad(std::span<const double> x, std::size_t batch,
                                 std::uint64_t seed) const {
  if (batch == 0) throw std::invalid_argument("minibatch_grad: batch must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(num_samples()));
  return sample_grad(x, idx);
}

double grad_check(const Problem& problem, std::span<const double> x, double h,
                  std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: h must be > 0");
  const std::size_t n = problem.dimension();
  require_same_size(x.size(), n, "grad_check");
  const DenseVec g = problem.full_grad(x);

  std::vector<std::size_t> coords(n);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (n > 1000) {
    Rng rng(seed);
    // Partial Fisher-Yates: first 200 entries become a uniform sample.
    for (std::size_t i = 0; i < 200; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(200);
  }

  DenseVec xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i : coords) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = problem.full_value(xp);
    xp[i] = xi - h;
    const double fm = problem.full_value(xp);
    xp[i] = xi;
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max({1.0, std::abs(fd), std::abs(g[i])});
    worst = std::max(worst, std::abs(fd - g[i]) / denom);
  }
  return worst;
}

}  // namespace apam
