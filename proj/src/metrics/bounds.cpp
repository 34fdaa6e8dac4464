#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "apam/metrics.hpp"
#include "apam/rng.hpp"

namespace apam {

std::vector<double> ergodic_weights(std::span<const double> alphas, double beta1) {
  if (alphas.empty()) throw std::invalid_argument("ergodic_weights: K must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("ergodic_weights: beta1 in [0,1)");
  const std::size_t K = alphas.size();
  std::vector<double> w(K);
  // S_k = alpha_k + beta1 S_{k+1}, S_K = alpha_K
  double acc = 0.0;
  for (std::size_t t = K; t-- > 0;) {
    if (!(alphas[t] > 0.0)) throw std::invalid_argument("ergodic_weights: alphas must be > 0");
    acc = alphas[t] + beta1 * acc;
    w[t] = acc;
  }
  double total = 0.0;
  for (double wk : w) total += wk;
  for (double& wk : w) wk /= total;
  return w;
}

DenseVec ergodic_average(std::span<const DenseVec> trajectory, std::span<const double> weights) {
  require_same_size(trajectory.size(), weights.size(), "ergodic_average");
  if (trajectory.empty()) throw std::invalid_argument("ergodic_average: empty trajectory");
  DenseVec out(trajectory.front().size(), 0.0);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    require_same_size(trajectory[k].size(), out.size(), "ergodic_average: iterate");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * trajectory[k][i];
  }
  return out;
}

std::uint64_t ncvx_sample_index(std::span<const double> alphas, std::uint64_t k0,
                                std::uint64_t K, std::uint64_t seed) {
  if (k0 < 2 || k0 > K) throw std::invalid_argument("ncvx_sample_index: need 2 <= k0 <= K");
  if (alphas.size() < K) throw std::invalid_argument("ncvx_sample_index: need alpha_1..alpha_K");
  double total = 0.0;
  for (std::uint64_t k = k0; k <= K; ++k) total += alphas[k - 2];
  Rng rng(seed);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::uint64_t k = k0; k <= K; ++k) {
    acc += alphas[k - 2];
    if (u < acc) return k;
  }
  return K;
}

namespace {

void check_betas(const BoundInputs& bi) {
  if (!(bi.beta1 >= 0.0 && bi.beta1 < 1.0)) throw std::invalid_argument("bound: beta1 must lie in [0,1)");
  if (!(bi.beta2 >= 0.0 && bi.beta2 < 1.0)) throw std::invalid_argument("bound: beta2 must lie in [0,1)");
  if (!(bi.alpha > 0.0)) throw std::invalid_argument("bound: alpha must be > 0");
  if (bi.K == 0) throw std::invalid_argument("bound: K must be >= 1");
}

double cvx_noise(const BoundInputs& bi) {
  const double b1 = 1.0 - bi.beta1;
  return bi.alpha * bi.alpha / (b1 * b1) * bi.G1 / std::sqrt(1.0 - bi.beta2);
}

}  // namespace

double bound_cvx_nodelay(const BoundInputs& bi, ScheduleKind schedule) {
  check_betas(bi);
  const double n = static_cast<double>(bi.n);
  const double K = static_cast<double>(bi.K);
  const double b1 = 1.0 - bi.beta1;
  const double sq_b2 = std::sqrt(1.0 - bi.beta2);
  const double a = bi.alpha;
  const double diam = n * bi.D_inf * bi.D_inf * bi.G_inf;
  switch (schedule) {
    case ScheduleKind::ConstOverSqrtK:
      return (diam + cvx_noise(bi)) / (2.0 * a * std::sqrt(K) * b1);
    case ScheduleKind::InvSqrtK:
      return (diam + a * a * (1.0 + std::log(K)) / (b1 * b1) * bi.G1 / sq_b2) /
             (4.0 * a * (std::sqrt(K + 1.0) - 1.0) * b1);
    case ScheduleKind::Constant:
      break;
  }
  throw std::invalid_argument("bound_cvx_nodelay: schedule has no rate statement");
}

double bound_cvx_delay(const BoundInputs& bi) {
  check_betas(bi);
  const double n = static_cast<double>(bi.n);
  const double K = static_cast<double>(bi.K);
  const double b1 = 1.0 - bi.beta1;
  const double a = bi.alpha;
  const double diam = n * bi.D_inf * bi.D_inf * bi.G_inf;
  const double noise = cvx_noise(bi);
  const double delay = a * a * a * bi.L * bi.tau * bi.tau * bi.s / (std::sqrt(K) * (1.0 - bi.beta2));
  return (diam + noise + delay) / (2.0 * a * std::sqrt(K) * b1);
}

NcvxBound ncvx_constants(const BoundInputs& bi, int setting, double e_vtilde_inv_l1) {
  check_betas(bi);
  if (!(bi.c > 0.0)) throw std::invalid_argument("bound_ncvx: c must be > 0");
  if (bi.k0 < 2 || bi.k0 > bi.K) throw std::invalid_argument("bound_ncvx: need 2 <= k0 <= K");
  const double G = bi.G_inf;
  const double b1 = 1.0 - bi.beta1;
  const double b2 = 1.0 - bi.beta2;
  const double a = bi.alpha;
  NcvxBound out;
  out.vtilde_inv_l1 = std::min(e_vtilde_inv_l1, static_cast<double>(bi.n) / bi.c);
  const double E = out.vtilde_inv_l1;

  if (setting == 1) {
    const double m = static_cast<double>(bi.K - bi.k0 + 1);
    const double sm = std::sqrt(m);
    out.c1 = G * G * G * E / (b1 * m) + 2.0 * bi.C_F * G / (a * sm) +
             7.0 * bi.s * bi.L * G * (1.0 - 2.0 * bi.beta1 + 4.0 * bi.beta1 * bi.beta1) /
                 (6.0 * b2 * b1 * b1) * a / sm;
    out.c2 = a * bi.tau * std::sqrt(bi.s) * bi.L * G / (std::sqrt(b2) * sm);
  } else if (setting == 2) {
    if (bi.K % 2 != 0 || bi.k0 * 2 != bi.K) {
      throw std::invalid_argument("bound_ncvx: setting 2 needs K even and k0 = K/2");
    }
    if (static_cast<double>(bi.k0) < bi.tau + 2.0) {
      throw std::invalid_argument("bound_ncvx: setting 2 needs k0 >= tau + 2");
    }
    const double K = static_cast<double>(bi.K);
    const double sK = std::sqrt(K);
    const double r = 2.0 - std::numbers::sqrt2;
    out.c1 = G * G * G * E / (r * b1 * sK * std::sqrt(K / 2.0 - 1.0)) + 2.0 * bi.C_F * G / (r * a * sK) +
             7.0 * bi.s * bi.L * G / (6.0 * b2) * a * std::log(4.0) / (r * sK) +
             7.0 * bi.s * bi.L * G * bi.beta1 * bi.beta1 / (2.0 * b2 * b1 * b1) * a *
                 (1.0 + std::log(3.0)) / (r * sK);
    out.c2 = 2.0 * std::numbers::sqrt2 * a * bi.tau * std::sqrt(bi.s) * bi.L * G / (sK * std::sqrt(b2));
  } else {
    throw std::invalid_argument("bound_ncvx: setting must be 1 or 2");
  }
  const double r = out.c2 / bi.c;
  out.value = out.c1 + r * (std::sqrt(out.c1) + r);
  return out;
}

double bound_ncvx(const BoundInputs& bi, int setting, double e_vtilde_inv_l1) {
  return ncvx_constants(bi, setting, e_vtilde_inv_l1).value;
}

}  // namespace apam
