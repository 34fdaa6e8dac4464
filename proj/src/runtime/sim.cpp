#include <stdexcept>

#include "apam/rng.hpp"
#include "master.hpp"

namespace apam {

RunTrace run_sim(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                 const RunHooks& hooks) {
  if (cfg.mode != RunMode::Sim) throw std::invalid_argument("run_sim: mode must be sim");
  // Versions before x^(1) hold x^(1), so startup reads see the delay they ask for.
  detail::MasterCore core(problem, hp, cfg, hooks, /*backfill=*/true);
  const std::size_t n = problem.dimension();
  const std::size_t W = cfg.workers;
  Rng delay_rng(mix64(cfg.master_seed ^ 0xD31A7ULL));
  std::vector<std::uint64_t> counters(W, 0);
  std::vector<std::size_t> coord_delays(n);

  for (std::uint64_t t = 0; !core.should_stop(); ++t) {
    const auto w = static_cast<std::uint32_t>(t % W);
    std::size_t d = 0;
    switch (cfg.delay.kind) {
      case DelayKind::Fixed: d = cfg.delay.tau; break;
      case DelayKind::UniformInt: d = delay_rng.below(cfg.delay.tau + 1); break;
      case DelayKind::PerWorkerFixed: d = cfg.delay.per_worker[w]; break;
    }
    Snapshot snap;
    if (cfg.policy.mode == ReadMode::Consistent || d == 0) {
      snap = snapshot_consistent(core.history(), d);
    } else {
      for (auto& cd : coord_delays) cd = delay_rng.below(d + 1);
      coord_delays[delay_rng.below(n)] = d;
      snap = snapshot_inconsistent(core.history(), coord_delays);
    }
    GradMsg msg;
    msg.worker_id = w;
    msg.batch_seed = batch_seed(cfg.master_seed, w, counters[w]++);
    msg.g = problem.minibatch_grad(snap.x, cfg.batch, msg.batch_seed);
    msg.meta = std::move(snap.meta);
    ++core.trace().produced;
    core.deliver(msg, t + 1);
  }
  return core.finish();
}

}  // namespace apam
