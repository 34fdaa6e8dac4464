#include "apam/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apam/rng.hpp"

namespace apam {

double alpha_at(const LrSchedule& schedule, std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("alpha_at: k must be >= 1");
  if (!(schedule.alpha > 0.0)) throw std::invalid_argument("alpha_at: alpha must be > 0");
  switch (schedule.kind) {
    case ScheduleKind::ConstOverSqrtK:
      if (schedule.horizon == 0) throw std::invalid_argument("alpha_at: K must be >= 1");
      return schedule.alpha / std::sqrt(static_cast<double>(schedule.horizon));
    case ScheduleKind::InvSqrtK:
      return schedule.alpha / std::sqrt(static_cast<double>(k));
    case ScheduleKind::Constant:
      return schedule.alpha;
  }
  throw std::logic_error("alpha_at: unknown schedule");
}

std::vector<double> alpha_sequence(const LrSchedule& schedule, std::uint64_t K) {
  std::vector<double> out;
  out.reserve(K);
  for (std::uint64_t k = 1; k <= K; ++k) out.push_back(alpha_at(schedule, k));
  return out;
}

void HyperParams::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in [0,1)");
  if (!(schedule.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  if (schedule.kind == ScheduleKind::ConstOverSqrtK && schedule.horizon == 0) {
    throw std::invalid_argument("schedule horizon K must be >= 1");
  }
}

OptimizerState OptimizerState::initial(DenseVec x0) {
  OptimizerState s;
  const std::size_t n = x0.size();
  s.x = std::move(x0);
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.vhat.assign(n, 0.0);
  s.k = 1;
  return s;
}

void apply_step(OptimizerState& state, std::span<const double> g, double alpha_k,
                const BoxConstraint& box, const HyperParams& hp) {
  const std::size_t n = state.x.size();
  require_same_size(g.size(), n, "step: gradient");
  require_same_size(box.size(), n, "step: box");
  if (!all_finite(g)) throw std::invalid_argument("step: non-finite gradient");
  if (!(alpha_k > 0.0) || !std::isfinite(alpha_k)) {
    throw std::invalid_argument("step: alpha_k must be positive and finite");
  }

  const double b1 = hp.beta1;
  const double b2 = hp.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    const double mi = b1 * state.m[i] + (1.0 - b1) * gi;
    const double vi = b2 * state.v[i] + (1.0 - b2) * gi * gi;
    const double vhi = std::max(state.vhat[i], vi);
    const double denom = std::sqrt(vhi) + hp.eps;
    state.m[i] = mi;
    state.v[i] = vi;
    state.vhat[i] = vhi;
    // Frozen coordinate: the weighted argmin is flat in x_i, keep the old value.
    if (denom == 0.0) continue;
    state.x[i] = std::clamp(state.x[i] - alpha_k * mi / denom, box.lower[i], box.upper[i]);
  }
  ++state.k;
}

OptimizerState step(OptimizerState state, std::span<const double> g, double alpha_k,
                    const BoxConstraint& box, const HyperParams& hp) {
  apply_step(state, g, alpha_k, box, hp);
  return state;
}

SerialRun run_serial(const Problem& problem, const HyperParams& hp, std::uint64_t steps,
                     std::size_t batch, std::uint64_t seed, DenseVec x0,
                     const SerialObserver& observer) {
  hp.validate();
  require_same_size(x0.size(), problem.dimension(), "run_serial: x0");
  SerialRun run;
  run.final_state = OptimizerState::initial(project_box(x0, problem.box()));
  run.iterates.reserve(steps + 1);
  run.iterates.push_back(run.final_state.x);
  for (std::uint64_t c = 0; c < steps; ++c) {
    OptimizerState& s = run.final_state;
    const DenseVec g = problem.minibatch_grad(s.x, batch, batch_seed(seed, 0, c));
    const double a = alpha_at(hp.schedule, s.k);
    apply_step(s, g, a, problem.box(), hp);
    run.iterates.push_back(s.x);
    if (observer) observer(s, g, a);
  }
  return run;
}

SerialRun run_serial(const Problem& problem, const HyperParams& hp, std::uint64_t steps,
                     std::size_t batch, std::uint64_t seed) {
  return run_serial(problem, hp, steps, batch, seed, problem.initial_point(seed));
}

}  // namespace apam
