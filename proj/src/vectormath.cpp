#include "apam/vectormath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace apam {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) +
                                ")");
  }
}

SparseVec SparseVec::from_pairs(std::vector<std::uint32_t> idx,
                                std::vector<double> val) {
  require_same_size(idx.size(), val.size(), "SparseVec");
  SparseVec out;
  out.indices.reserve(idx.size());
  out.values.reserve(val.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (j > 0 && idx[j] <= idx[j - 1]) {
      throw std::invalid_argument("SparseVec: indices must be strictly increasing");
    }
    if (val[j] != 0.0) {
      out.indices.push_back(idx[j]);
      out.values.push_back(val[j]);
    }
  }
  return out;
}

SparseVec SparseVec::from_dense(std::span<const double> dense) {
  SparseVec out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.indices.push_back(static_cast<std::uint32_t>(i));
      out.values.push_back(dense[i]);
    }
  }
  return out;
}

DenseVec SparseVec::to_dense(std::size_t n) const {
  DenseVec out(n, 0.0);
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= n) throw std::out_of_range("SparseVec::to_dense: index >= n");
    out[indices[j]] = values[j];
  }
  return out;
}

double SparseVec::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (std::size_t j = 0; j < indices.size(); ++j) s += values[j] * dense[indices[j]];
  return s;
}

void SparseVec::axpy_into(double alpha, std::span<double> out) const {
  for (std::size_t j = 0; j < indices.size(); ++j) out[indices[j]] += alpha * values[j];
}

BoxConstraint::BoxConstraint(DenseVec lo, DenseVec hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  require_same_size(lower.size(), upper.size(), "BoxConstraint");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw std::invalid_argument("BoxConstraint: lower_i must be <= upper_i (coordinate " +
                                  std::to_string(i) + ")");
    }
  }
}

BoxConstraint BoxConstraint::unconstrained(std::size_t n) {
  return BoxConstraint(DenseVec(n, -kInf), DenseVec(n, kInf));
}

BoxConstraint BoxConstraint::uniform(std::size_t n, double lo, double hi) {
  return BoxConstraint(DenseVec(n, lo), DenseVec(n, hi));
}

bool BoxConstraint::is_bounded() const {
  return std::all_of(lower.begin(), lower.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(upper.begin(), upper.end(), [](double v) { return std::isfinite(v); });
}

bool BoxConstraint::contains(std::span<const double> x) const {
  require_same_size(x.size(), size(), "BoxConstraint::contains");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

double BoxConstraint::diameter_inf() const {
  double d = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) d = std::max(d, upper[i] - lower[i]);
  return d;
}

DenseVec safe_div(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "safe_div");
  DenseVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] < 0.0) throw std::invalid_argument("safe_div: negative divisor");
    if (b[i] == 0.0) {
      if (a[i] != 0.0) {
        throw std::domain_error("safe_div: nonzero numerator over zero at coordinate " +
                                std::to_string(i));
      }
      out[i] = 0.0;
    } else {
      out[i] = a[i] / b[i];
    }
  }
  return out;
}

double weighted_norm_sq(std::span<const double> x, std::span<const double> v) {
  require_same_size(x.size(), v.size(), "weighted_norm_sq");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += v[i] * x[i] * x[i];
  return s;
}

DenseVec project_box(std::span<const double> x, const BoxConstraint& box) {
  require_same_size(x.size(), box.size(), "project_box");
  DenseVec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::clamp(x[i], box.lower[i], box.upper[i]);
  }
  return out;
}

DenseVec hadamard(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "hadamard");
  DenseVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

DenseVec sqrt_vec(std::span<const double> v) {
  DenseVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) throw std::domain_error("sqrt_vec: negative entry");
    out[i] = std::sqrt(v[i]);
  }
  return out;
}

DenseVec max_vec(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "max_vec");
  DenseVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

DenseVec axpy(double alpha, std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "axpy");
  DenseVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + b[i];
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

std::size_t count_nonzero(std::span<const double> a) {
  return static_cast<std::size_t>(std::count_if(a.begin(), a.end(), [](double v) { return v != 0.0; }));
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

DenseVec sub(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "sub");
  DenseVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace apam
