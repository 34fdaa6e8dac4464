#pragma once

// Dense/sparse vector arithmetic with component-wise conventions used by the
// adaptive optimizer: 0/0 = 0 division, diagonal weighted norms and box
// projection. All reductions run left to right in coordinate order so that
// results are reproducible bit for bit.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace apam {

using DenseVec = std::vector<double>;

/// Sparse vector with strictly increasing 0-based indices and no stored zeros.
struct SparseVec {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }

  /// Builds from parallel arrays; validates ordering and drops explicit zeros.
  static SparseVec from_pairs(std::vector<std::uint32_t> idx,
                              std::vector<double> val);
  static SparseVec from_dense(std::span<const double> dense);

  DenseVec to_dense(std::size_t n) const;
  double dot(std::span<const double> dense) const;
  /// out += alpha * this
  void axpy_into(double alpha, std::span<double> out) const;

  bool operator==(const SparseVec&) const = default;
};

/// Axis-aligned box X = [l_1,u_1] x ... x [l_n,u_n]; infinite bounds allowed.
struct BoxConstraint {
  DenseVec lower;
  DenseVec upper;

  static BoxConstraint unconstrained(std::size_t n);
  static BoxConstraint uniform(std::size_t n, double lo, double hi);
  BoxConstraint(DenseVec lo, DenseVec hi);
  BoxConstraint() = default;

  std::size_t size() const { return lower.size(); }
  bool is_bounded() const;
  bool contains(std::span<const double> x) const;
  /// max_i (u_i - l_i); infinite if any side is open.
  double diameter_inf() const;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// out_i = a_i / b_i with the convention 0/0 = 0. Throws std::domain_error
/// when a_i != 0 and b_i == 0, and std::invalid_argument on b_i < 0.
DenseVec safe_div(std::span<const double> a, std::span<const double> b);

/// sum_i v_i x_i^2
double weighted_norm_sq(std::span<const double> x, std::span<const double> v);

DenseVec project_box(std::span<const double> x, const BoxConstraint& box);

DenseVec hadamard(std::span<const double> a, std::span<const double> b);
DenseVec sqrt_vec(std::span<const double> v);
DenseVec max_vec(std::span<const double> a, std::span<const double> b);
/// alpha * a + b
DenseVec axpy(double alpha, std::span<const double> a,
              std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);
std::size_t count_nonzero(std::span<const double> a);
bool all_finite(std::span<const double> a);
DenseVec sub(std::span<const double> a, std::span<const double> b);

void require_same_size(std::size_t a, std::size_t b, const char* what);

}  // namespace apam
