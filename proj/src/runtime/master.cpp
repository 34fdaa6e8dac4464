#include "master.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace apam::detail {

std::size_t history_capacity_for(const RunConfig& cfg) {
  if (cfg.history_capacity != 0) return cfg.history_capacity;
  std::size_t deepest = cfg.policy.tau_max;
  if (cfg.mode == RunMode::Sim) deepest = std::max(deepest, cfg.delay.max_delay());
  return deepest + 2;
}

namespace {

OptimizerState initial_state(const Problem& problem, const RunConfig& cfg) {
  DenseVec x0 = cfg.x0 ? *cfg.x0 : problem.initial_point(cfg.master_seed);
  require_same_size(x0.size(), problem.dimension(), "run: x0");
  return OptimizerState::initial(project_box(x0, problem.box()));
}

}  // namespace

MasterCore::MasterCore(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                       const RunHooks& hooks, bool backfill)
    : problem_(problem),
      hp_(hp),
      cfg_(cfg),
      hooks_(hooks),
      state_(initial_state(problem, cfg)),
      history_(history_capacity_for(cfg), state_.x, 1, backfill),
      budget_(cfg.delivery_budget()) {
  hp_.validate();
  cfg_.validate();
  trace_.mode = cfg.mode;
}

bool MasterCore::deliver(const GradMsg& msg, std::uint64_t clock_ns) {
  require_same_size(msg.g.size(), state_.dimension(), "deliver: gradient");
  if (!all_finite(msg.g)) {
    throw std::runtime_error("deliver: non-finite gradient from worker " +
                             std::to_string(msg.worker_id));
  }
  ++deliveries_;
  const Version current = history_.current_version();
  const std::size_t tau = tau_of(msg.meta, current);
  if (admit(msg.meta, current, cfg_.policy) == Admission::Drop) {
    ++trace_.dropped;
    ++drops_since_row_;
    for (StepObserver* o : hooks_.observers) o->on_drop(tau);
    return false;
  }

  const std::uint64_t k = state_.k;
  const double alpha = alpha_at(hp_.schedule, k);
  const DenseVec x_prev = state_.x;
  apply_step(state_, msg.g, alpha, problem_.box(), hp_);
  ++trace_.applied;
  if (trace_.tau_histogram.size() <= tau) trace_.tau_histogram.resize(tau + 1, 0);
  ++trace_.tau_histogram[tau];
  trace_.applied_tau.push_back(tau);

  const StepEvent ev{k, alpha, tau, msg.g, x_prev, state_, history_, msg.meta};
  for (StepObserver* o : hooks_.observers) o->on_step(ev);
  history_.push(state_.x);

  if ((k - 1) % cfg_.eval_stride == 0 || k == cfg_.iterations) {
    TraceRow row;
    row.k = k;
    row.alpha_k = alpha;
    row.tau = tau;
    row.dropped = drops_since_row_;
    row.objective = problem_.full_value(state_.x);
    row.grad_norm_sq = norm_sq(problem_.full_grad(state_.x));
    row.wallclock_ns = clock_ns;
    trace_.rows.push_back(row);
    drops_since_row_ = 0;
  }
  return true;
}

RunTrace MasterCore::finish(std::vector<std::pair<std::string, std::string>> extra) {
  trace_.final_state = state_;
  trace_.truncated = !done();
  auto& p = trace_.preamble;
  p.clear();
  p.emplace_back("mode", to_string(cfg_.mode));
  p.emplace_back("problem", problem_.name());
  p.emplace_back("n", std::to_string(problem_.dimension()));
  p.emplace_back("workers", std::to_string(cfg_.workers));
  p.emplace_back("batch", std::to_string(cfg_.batch));
  p.emplace_back("iterations", std::to_string(cfg_.iterations));
  p.emplace_back("tau_max", std::to_string(cfg_.policy.tau_max));
  p.emplace_back("read_mode", cfg_.policy.mode == ReadMode::Consistent ? "consistent" : "inconsistent");
  if (cfg_.mode == RunMode::Sim) p.emplace_back("delay", cfg_.delay.describe());
  p.emplace_back("seed", std::to_string(cfg_.master_seed));
  p.emplace_back("beta1", format_double(hp_.beta1));
  p.emplace_back("beta2", format_double(hp_.beta2));
  p.emplace_back("alpha", format_double(hp_.schedule.alpha));
  p.emplace_back("applied", std::to_string(trace_.applied));
  p.emplace_back("dropped", std::to_string(trace_.dropped));
  p.emplace_back("truncated", trace_.truncated ? "1" : "0");
  for (auto& kv : extra) p.push_back(std::move(kv));
  return std::move(trace_);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

}  // namespace apam::detail
