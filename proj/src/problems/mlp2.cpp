#include <algorithm>
#include <cmath>

#include "apam/problems.hpp"
#include "apam/rng.hpp"

namespace apam {
namespace {

class Mlp2 final : public Problem {
 public:
  Mlp2(Dataset data, std::size_t hidden, std::uint64_t init_seed)
      : Problem(Mlp2Layout{data.n_features, hidden, data.n_classes}.size()),
        layout_{data.n_features, hidden, data.n_classes},
        labels_(std::move(data.labels)),
        init_seed_(init_seed) {
    inputs_.reserve(data.rows.size());
    for (const auto& r : data.rows) inputs_.push_back(r.to_dense(layout_.inputs));
  }

  std::string name() const override { return "mlp2"; }
  std::size_t dimension() const override { return layout_.size(); }
  std::size_t num_samples() const override { return inputs_.size(); }

  double full_value(std::span<const double> theta) const override {
    check_dim(theta);
    Scratch s(layout_);
    double loss = 0.0;
    for (std::size_t j = 0; j < inputs_.size(); ++j) loss += forward(theta, j, s);
    return loss / static_cast<double>(inputs_.size());
  }

  DenseVec full_grad(std::span<const double> theta) const override {
    check_dim(theta);
    DenseVec g(dimension(), 0.0);
    Scratch s(layout_);
    const double w = 1.0 / static_cast<double>(inputs_.size());
    for (std::size_t j = 0; j < inputs_.size(); ++j) {
      forward(theta, j, s);
      backward(theta, j, w, s, g);
    }
    return g;
  }

  DenseVec sample_grad(std::span<const double> theta,
                       std::span<const std::size_t> samples) const override {
    check_dim(theta);
    if (samples.empty()) throw std::invalid_argument("mlp2: empty sample set");
    DenseVec g(dimension(), 0.0);
    Scratch s(layout_);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (std::size_t j : samples) {
      if (j >= inputs_.size()) throw std::out_of_range("mlp2: sample index");
      forward(theta, j, s);
      backward(theta, j, w, s, g);
    }
    return g;
  }

  DenseVec initial_point(std::uint64_t seed) const override {
    Rng rng(mix64(init_seed_ ^ mix64(seed)));
    DenseVec theta(dimension());
    for (double& t : theta) t = rng.normal();
    return project_box(theta, box());
  }

 private:
  struct Scratch {
    explicit Scratch(const Mlp2Layout& l) : hid(l.hidden), prob(l.classes), dhid(l.hidden) {}
    DenseVec hid;   // tanh activations
    DenseVec prob;  // softmax output
    DenseVec dhid;
  };

  double forward(std::span<const double> th, std::size_t j, Scratch& s) const {
    const auto& x = inputs_[j];
    const std::size_t d = layout_.inputs, h = layout_.hidden, c = layout_.classes;
    const double* w1 = th.data() + layout_.w1();
    const double* b1 = th.data() + layout_.b1();
    const double* w2 = th.data() + layout_.w2();
    const double* b2 = th.data() + layout_.b2();
    for (std::size_t r = 0; r < h; ++r) {
      double a = b1[r];
      for (std::size_t i = 0; i < d; ++i) a += w1[r * d + i] * x[i];
      s.hid[r] = std::tanh(a);
    }
    double mx = -kInf;
    for (std::size_t q = 0; q < c; ++q) {
      double o = b2[q];
      for (std::size_t r = 0; r < h; ++r) o += w2[q * h + r] * s.hid[r];
      s.prob[q] = o;
      mx = std::max(mx, o);
    }
    double z = 0.0;
    for (std::size_t q = 0; q < c; ++q) z += std::exp(s.prob[q] - mx);
    const double log_z = mx + std::log(z);
    const auto y = static_cast<std::size_t>(labels_[j]);
    const double loss = log_z - s.prob[y];
    for (std::size_t q = 0; q < c; ++q) s.prob[q] = std::exp(s.prob[q] - log_z);
    return loss;
  }

  // Accumulates weight * d(loss_j)/d(theta) into g; expects forward() state.
  void backward(std::span<const double> th, std::size_t j, double weight, Scratch& s,
                DenseVec& g) const {
    const auto& x = inputs_[j];
    const std::size_t d = layout_.inputs, h = layout_.hidden, c = layout_.classes;
    const double* w2 = th.data() + layout_.w2();
    const auto y = static_cast<std::size_t>(labels_[j]);
    std::fill(s.dhid.begin(), s.dhid.end(), 0.0);
    for (std::size_t q = 0; q < c; ++q) {
      const double dout = (s.prob[q] - (q == y ? 1.0 : 0.0)) * weight;
      g[layout_.b2() + q] += dout;
      for (std::size_t r = 0; r < h; ++r) {
        g[layout_.w2() + q * h + r] += dout * s.hid[r];
        s.dhid[r] += dout * w2[q * h + r];
      }
    }
    for (std::size_t r = 0; r < h; ++r) {
      const double da = s.dhid[r] * (1.0 - s.hid[r] * s.hid[r]);
      g[layout_.b1() + r] += da;
      double* gw = g.data() + layout_.w1() + r * d;
      for (std::size_t i = 0; i < d; ++i) gw[i] += da * x[i];
    }
  }

  Mlp2Layout layout_;
  std::vector<DenseVec> inputs_;
  std::vector<int> labels_;
  std::uint64_t init_seed_;
};

}  // namespace

std::unique_ptr<Problem> mlp2(Dataset data, std::size_t hidden, std::uint64_t init_seed) {
  data.validate();
  if (hidden == 0) throw std::invalid_argument("mlp2: hidden width must be >= 1");
  if (data.n_classes < 2) throw std::invalid_argument("mlp2: need at least two classes");
  if (data.is_binary()) {
    // +-1 labels map onto class ids 0/1.
    for (int& y : data.labels) y = y > 0 ? 1 : 0;
  }
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= data.n_classes) {
      throw std::invalid_argument("mlp2: label outside 0..C-1");
    }
  }
  return std::make_unique<Mlp2>(std::move(data), hidden, init_seed);
}

}  // namespace apam
