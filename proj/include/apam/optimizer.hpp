#pragma once

// The APAM master update: AMSGrad moments with a max-corrected second moment
// and a diagonally weighted proximal step onto a box.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "apam/problems.hpp"
#include "apam/vectormath.hpp"

namespace apam {

enum class ScheduleKind {
  ConstOverSqrtK,  // alpha / sqrt(K) for every k
  InvSqrtK,        // alpha / sqrt(k)
  Constant,        // alpha for every k
};

struct LrSchedule {
  ScheduleKind kind = ScheduleKind::ConstOverSqrtK;
  double alpha = 1e-2;
  std::uint64_t horizon = 1;  // K, only read by ConstOverSqrtK

  static LrSchedule const_over_sqrt_k(double alpha, std::uint64_t K) {
    return {ScheduleKind::ConstOverSqrtK, alpha, K};
  }
  static LrSchedule inv_sqrt_k(double alpha) { return {ScheduleKind::InvSqrtK, alpha, 1}; }
  static LrSchedule constant(double alpha) { return {ScheduleKind::Constant, alpha, 1}; }

  bool operator==(const LrSchedule&) const = default;
};

/// Step size at iteration k >= 1.
double alpha_at(const LrSchedule& schedule, std::uint64_t k);

/// alpha_1..alpha_K
std::vector<double> alpha_sequence(const LrSchedule& schedule, std::uint64_t K);

struct HyperParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  LrSchedule schedule;
  double eps = 0.0;

  void validate() const;
  bool operator==(const HyperParams&) const = default;
};

/// (x, m, v, vhat) plus the index k of the iterate x = x^(k).
struct OptimizerState {
  DenseVec x;
  DenseVec m;
  DenseVec v;
  DenseVec vhat;
  std::uint64_t k = 1;

  static OptimizerState initial(DenseVec x0);
  std::size_t dimension() const { return x.size(); }
};

/// Applies one update in place with gradient g^(k):
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  vhat <- max(vhat, v)
///   x <- clamp(x - alpha_k m / (sqrt(vhat) + eps), box)
/// Coordinates with vhat_i + eps == 0 keep their value. All inputs are
/// validated before anything is written, so a throw leaves the state intact.
void apply_step(OptimizerState& state, std::span<const double> g, double alpha_k,
                const BoxConstraint& box, const HyperParams& hp);

/// Value-returning form of apply_step.
OptimizerState step(OptimizerState state, std::span<const double> g, double alpha_k,
                    const BoxConstraint& box, const HyperParams& hp);

struct SerialRun {
  std::vector<DenseVec> iterates;  // x^(1) .. x^(K+1)
  OptimizerState final_state;
};

using SerialObserver =
    std::function<void(const OptimizerState& after, std::span<const double> g, double alpha_k)>;

/// No-delay reference: at every k draws mini-batch b of worker 0's seed stream
/// at the current x and steps. Deterministic in (problem, hp, seed, x0).
SerialRun run_serial(const Problem& problem, const HyperParams& hp, std::uint64_t steps,
                     std::size_t batch, std::uint64_t seed, DenseVec x0,
                     const SerialObserver& observer = {});

/// Same as above with x0 = problem.initial_point(seed).
SerialRun run_serial(const Problem& problem, const HyperParams& hp, std::uint64_t steps,
                     std::size_t batch, std::uint64_t seed);

}  // namespace apam
