#pragma once

// Objective functions with exact full gradients and seeded mini-batch
// stochastic gradients over a finite training set.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "apam/vectormath.hpp"

namespace apam {

/// Labelled sparse rows. Binary problems use labels +-1; multiclass problems
/// use class ids 0..n_classes-1.
struct Dataset {
  std::vector<SparseVec> rows;
  std::vector<int> labels;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;

  std::size_t size() const { return rows.size(); }
  bool is_binary() const;
  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
  bool operator==(const Dataset&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using WarningSink = std::function<void(const std::string&)>;

/// Reads "label idx:val idx:val ..." lines with 1-based indices.
Dataset load_libsvm(const std::string& path, const WarningSink& warn = {});
Dataset parse_libsvm(std::string_view text, const WarningSink& warn = {});
void write_libsvm(const Dataset& data, const std::string& path);
std::string format_libsvm(const Dataset& data);

/// Gaussian class clouds. With n_classes == 2 labels are +-1; separable data
/// keeps every point at signed distance >= 1 from a hidden hyperplane.
Dataset synth_classification(std::size_t samples, std::size_t features, bool separable,
                             std::uint64_t seed, std::size_t n_classes = 2);

/// F(x) = (1/N) sum_j f(x; xi_j) over a finite sample set, optionally with a
/// box constraint.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t num_samples() const = 0;
  virtual double full_value(std::span<const double> x) const = 0;
  virtual DenseVec full_grad(std::span<const double> x) const = 0;
  /// Mean gradient over an explicit multiset of sample indices.
  virtual DenseVec sample_grad(std::span<const double> x,
                               std::span<const std::size_t> samples) const = 0;
  virtual DenseVec initial_point(std::uint64_t seed) const = 0;

  /// Mean gradient over b indices drawn uniformly with replacement.
  DenseVec minibatch_grad(std::span<const double> x, std::size_t batch,
                          std::uint64_t seed) const;

  const BoxConstraint& box() const { return box_; }
  void set_box(BoxConstraint box);

 protected:
  explicit Problem(std::size_t n) : box_(BoxConstraint::unconstrained(n)) {}
  void check_dim(std::span<const double> x) const;

 private:
  BoxConstraint box_;
};

/// (1/N) sum log(1 + exp(-y_j w.x_j)) + (l2/2)||w||^2
std::unique_ptr<Problem> logistic(Dataset data, double l2);

struct Mlp2Layout {
  std::size_t inputs = 0;
  std::size_t hidden = 50;
  std::size_t classes = 0;

  std::size_t w1() const { return 0; }
  std::size_t b1() const { return hidden * inputs; }
  std::size_t w2() const { return b1() + hidden; }
  std::size_t b2() const { return w2() + classes * hidden; }
  std::size_t size() const { return b2() + classes; }
};

/// Softmax cross-entropy of W2 tanh(W1 x + b1) + b2 with flat parameters
/// [W1 (h x d) | b1 (h) | W2 (C x h) | b2 (C)], row-major.
std::unique_ptr<Problem> mlp2(Dataset data, std::size_t hidden, std::uint64_t init_seed);

/// Finite sum of f_j(x) = 1/2 sum a_i x_i^2 - (b + shifts_j).x with
/// sum_j shifts_j = 0, so F(x) = 1/2 sum a_i x_i^2 - b.x.
class QuadraticProblem;
std::unique_ptr<QuadraticProblem> quadratic(DenseVec a, DenseVec b);
std::unique_ptr<QuadraticProblem> quadratic(DenseVec a, DenseVec b,
                                            std::vector<DenseVec> shifts);

class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(DenseVec a, DenseVec b, std::vector<DenseVec> shifts);

  std::string name() const override { return "quadratic"; }
  std::size_t dimension() const override { return a_.size(); }
  std::size_t num_samples() const override { return shifts_.size(); }
  double full_value(std::span<const double> x) const override;
  DenseVec full_grad(std::span<const double> x) const override;
  DenseVec sample_grad(std::span<const double> x,
                       std::span<const std::size_t> samples) const override;
  DenseVec initial_point(std::uint64_t seed) const override;

  const DenseVec& a() const { return a_; }
  const DenseVec& b() const { return b_; }
  const std::vector<DenseVec>& shifts() const { return shifts_; }

  /// Minimizer over the current box. Coordinates with a_i == 0 need a finite
  /// bound on the side b_i points to, otherwise std::domain_error.
  DenseVec minimizer() const;
  double optimal_value() const;
  /// max_i a_i, the smoothness constant of F.
  double lipschitz() const;
  /// Exact sup over the box of ||grad f_j||_inf and of mean_j ||grad f_j||_1.
  double grad_inf_bound() const;
  double grad_l1_bound() const;

 private:
  DenseVec a_;
  DenseVec b_;
  std::vector<DenseVec> shifts_;
};

/// Random instance on the box [-1, 1]^n: a `linear_fraction` share of the
/// coordinates has a_i = 0 (optimum on the boundary), the rest a_i in [0.5, 2];
/// `samples` zero-mean Gaussian shifts of scale `noise`.
std::unique_ptr<QuadraticProblem> synth_quadratic(std::size_t n, std::size_t samples,
                                                  double linear_fraction, double noise,
                                                  std::uint64_t seed);

/// Largest per-coordinate relative error between central differences and the
/// analytic full gradient: |fd - g| / max(1, |fd|, |g|). Problems with more
/// than 1000 coordinates are checked on 200 random coordinates.
double grad_check(const Problem& problem, std::span<const double> x, double h = 1e-6,
                  std::uint64_t seed = 0);

}  // namespace apam
