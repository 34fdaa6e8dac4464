#pragma once

// Independent reference implementations and seeded generators for tests.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "apam/problems.hpp"
#include "apam/rng.hpp"
#include "apam/vectormath.hpp"

namespace oracle {

using apam::DenseVec;

/// Seeded value generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  double normal() { return rng_.normal(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_.below(n)); }
  bool coin(double p = 0.5) { return rng_.uniform() < p; }

  DenseVec vec(std::size_t n, double lo = -1.0, double hi = 1.0) {
    DenseVec v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }
  DenseVec normal_vec(std::size_t n, double scale = 1.0) {
    DenseVec v(n);
    for (double& x : v) x = scale * normal();
    return v;
  }
  /// Gradient-like vector with some exact zeros.
  DenseVec sparse_vec(std::size_t n, double density, double scale = 1.0) {
    DenseVec v(n, 0.0);
    for (double& x : v) {
      if (coin(density)) x = scale * normal();
    }
    return v;
  }

 private:
  apam::Rng rng_;
};

/// Bitwise CRC-32 (reflected polynomial 0xEDB88320).
inline std::uint32_t crc32_bitwise(const std::uint8_t* p, std::size_t n) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= p[i];
    for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

/// Scalar-loop AMSGrad step written directly from the update rules.
struct RefState {
  DenseVec x, m, v, vhat;
};

inline void ref_step(RefState& s, const DenseVec& g, double alpha, double b1, double b2,
                     const apam::BoxConstraint& box, double eps = 0.0) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.m[i] = b1 * s.m[i] + (1 - b1) * g[i];
    s.v[i] = b2 * s.v[i] + (1 - b2) * g[i] * g[i];
    if (s.v[i] > s.vhat[i]) s.vhat[i] = s.v[i];
    const double d = std::sqrt(s.vhat[i]) + eps;
    if (d == 0.0) continue;
    double xi = s.x[i] - alpha * s.m[i] / d;
    if (xi < box.lower[i]) xi = box.lower[i];
    if (xi > box.upper[i]) xi = box.upper[i];
    s.x[i] = xi;
  }
}

/// Smallest j with I_j = [n]: coordinate i "belongs" to the last j steps when
/// xhat_i equals x_i of one of the iterates hist[k-j..k] (hist back = x^(k)).
inline std::size_t tau_bruteforce(const std::vector<DenseVec>& hist, const DenseVec& xhat) {
  const std::size_t k = hist.size() - 1;
  for (std::size_t j = 0; j <= k; ++j) {
    bool all = true;
    for (std::size_t i = 0; i < xhat.size() && all; ++i) {
      bool found = false;
      for (std::size_t l = 0; l <= j; ++l) found = found || hist[k - l][i] == xhat[i];
      all = found;
    }
    if (all) return j;
  }
  return static_cast<std::size_t>(-1);
}

/// Minimizer of a strictly convex l2-regularized logistic objective by
/// Newton's method with a dense Hessian and backtracking.
inline double logistic_optimum(const apam::Dataset& d, double l2, DenseVec* argmin = nullptr) {
  const std::size_t n = d.n_features;
  const double N = static_cast<double>(d.rows.size());
  DenseVec w(n, 0.0);
  auto value = [&](const DenseVec& x) {
    double f = 0.0;
    for (std::size_t j = 0; j < d.rows.size(); ++j) {
      const double z = -d.labels[j] * d.rows[j].dot(x);
      f += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    double r = 0.0;
    for (double xi : x) r += xi * xi;
    return f / N + 0.5 * l2 * r;
  };
  for (int it = 0; it < 50; ++it) {
    DenseVec g(n, 0.0);
    std::vector<double> H(n * n, 0.0);
    for (std::size_t j = 0; j < d.rows.size(); ++j) {
      const auto& row = d.rows[j];
      const double y = d.labels[j];
      const double z = y * row.dot(w);
      const double s = 1.0 / (1.0 + std::exp(z));  // sigma(-z)
      const double h = s * (1 - s);
      for (std::size_t a = 0; a < row.nnz(); ++a) {
        g[row.indices[a]] -= y * s * row.values[a] / N;
        for (std::size_t b = 0; b < row.nnz(); ++b) {
          H[row.indices[a] * n + row.indices[b]] += h * row.values[a] * row.values[b] / N;
        }
      }
    }
    double gn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] += l2 * w[i];
      H[i * n + i] += l2;
      gn += g[i] * g[i];
    }
    if (gn < 1e-28) break;
    // Cholesky solve H p = g.
    std::vector<double> L(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t jj = 0; jj <= i; ++jj) {
        double s = H[i * n + jj];
        for (std::size_t kk = 0; kk < jj; ++kk) s -= L[i * n + kk] * L[jj * n + kk];
        L[i * n + jj] = i == jj ? std::sqrt(s) : s / L[jj * n + jj];
      }
    }
    DenseVec y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = g[i];
      for (std::size_t kk = 0; kk < i; ++kk) s -= L[i * n + kk] * y[kk];
      y[i] = s / L[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      for (std::size_t kk = i + 1; kk < n; ++kk) s -= L[kk * n + i] * p[kk];
      p[i] = s / L[i * n + i];
    }
    double t = 1.0;
    const double f0 = value(w);
    DenseVec cand(n);
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) cand[i] = w[i] - t * p[i];
      if (value(cand) <= f0) break;
      t *= 0.5;
    }
    w = cand;
  }
  if (argmin) *argmin = w;
  return value(w);
}

}  // namespace oracle
