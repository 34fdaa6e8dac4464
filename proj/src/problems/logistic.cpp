#include <cmath>

#include "apam/problems.hpp"
#include "apam/rng.hpp"

namespace apam {
namespace {

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) {
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// 1 / (1 + exp(z))
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

class Logistic final : public Problem {
 public:
  Logistic(Dataset data, double l2)
      : Problem(data.n_features), data_(std::move(data)), l2_(l2) {}

  std::string name() const override { return "logistic"; }
  std::size_t dimension() const override { return data_.n_features; }
  std::size_t num_samples() const override { return data_.size(); }

  double full_value(std::span<const double> w) const override {
    check_dim(w);
    double s = 0.0;
    for (std::size_t j = 0; j < data_.size(); ++j) {
      s += softplus_neg(data_.labels[j] * data_.rows[j].dot(w));
    }
    return s / static_cast<double>(data_.size()) + 0.5 * l2_ * norm_sq(w);
  }

  DenseVec full_grad(std::span<const double> w) const override {
    check_dim(w);
    DenseVec g(dimension(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(data_.size());
    for (std::size_t j = 0; j < data_.size(); ++j) {
      const double y = data_.labels[j];
      const double coef = -y * sigmoid_neg(y * data_.rows[j].dot(w)) * inv_n;
      data_.rows[j].axpy_into(coef, g);
    }
    if (l2_ != 0.0) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += l2_ * w[i];
    }
    return g;
  }

  DenseVec sample_grad(std::span<const double> w,
                       std::span<const std::size_t> samples) const override {
    check_dim(w);
    if (samples.empty()) throw std::invalid_argument("logistic: empty sample set");
    DenseVec g(dimension(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(samples.size());
    for (std::size_t j : samples) {
      const double y = data_.labels.at(j);
      const double coef = -y * sigmoid_neg(y * data_.rows[j].dot(w)) * inv_b;
      data_.rows[j].axpy_into(coef, g);
    }
    if (l2_ != 0.0) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += l2_ * w[i];
    }
    return g;
  }

  DenseVec initial_point(std::uint64_t seed) const override {
    Rng rng(mix64(seed ^ 0x1A2B3C4DULL));
    DenseVec w(dimension());
    for (double& wi : w) wi = rng.normal();
    return project_box(w, box());
  }

 private:
  Dataset data_;
  double l2_;
};

}  // namespace

std::unique_ptr<Problem> logistic(Dataset data, double l2) {
  data.validate();
  if (!data.is_binary()) throw std::invalid_argument("logistic: labels must be +1/-1");
  if (!(l2 >= 0.0)) throw std::invalid_argument("logistic: l2 must be >= 0");
  return std::make_unique<Logistic>(std::move(data), l2);
}

}  // namespace apam
