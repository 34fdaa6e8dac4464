#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "apam/rng.hpp"
#include "master.hpp"

namespace apam {

namespace {

/// Bounded MPSC queue; push blocks while full, both sides return early once
/// closed.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : cap_(capacity) {}

  bool push(T item) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return closed_ || items_.size() < cap_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    {
      std::lock_guard lk(mu_);
      closed_ = true;
    }
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lk(mu_);
    return items_.size();
  }

 private:
  std::size_t cap_;
  mutable std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace

RunTrace run_threads(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                     const RunHooks& hooks) {
  if (cfg.mode != RunMode::Threads) throw std::invalid_argument("run_threads: mode must be threads");
  detail::MasterCore core(problem, hp, cfg, hooks, /*backfill=*/false);
  const std::size_t W = cfg.workers;
  SharedParams shared(core.state().x, core.version());
  BoundedQueue<GradMsg> queue(cfg.queue_capacity ? cfg.queue_capacity : 4 * W);
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> produced{0};
  std::mutex err_mu;
  std::exception_ptr worker_error;
  std::uint32_t failed_worker = 0;

  auto worker = [&](std::uint32_t w) {
    try {
      for (std::uint64_t c = 0; !stop.load(std::memory_order_relaxed); ++c) {
        Snapshot snap = shared.read();
        GradMsg msg;
        msg.worker_id = w;
        msg.batch_seed = batch_seed(cfg.master_seed, w, c);
        msg.g = problem.minibatch_grad(snap.x, cfg.batch, msg.batch_seed);
        msg.meta = std::move(snap.meta);
        if (!queue.push(std::move(msg))) break;
        produced.fetch_add(1, std::memory_order_relaxed);
      }
    } catch (...) {
      {
        std::lock_guard lk(err_mu);
        if (!worker_error) {
          worker_error = std::current_exception();
          failed_worker = w;
        }
      }
      stop = true;
      queue.close();
    }
  };

  detail::Stopwatch clock;
  std::vector<std::thread> pool;
  pool.reserve(W);
  for (std::size_t w = 0; w < W; ++w) pool.emplace_back(worker, static_cast<std::uint32_t>(w));

  auto shutdown = [&] {
    stop = true;
    queue.close();
    for (auto& t : pool) t.join();
  };

  try {
    while (!core.should_stop()) {
      std::optional<GradMsg> msg = queue.pop();
      if (!msg) break;
      if (core.deliver(*msg, clock.ns())) shared.publish(core.state().x, core.version());
    }
  } catch (...) {
    shutdown();
    throw;
  }
  const double elapsed = clock.seconds();
  shutdown();

  if (worker_error) {
    try {
      std::rethrow_exception(worker_error);
    } catch (const std::exception& e) {
      throw std::runtime_error("threads run aborted: worker " + std::to_string(failed_worker) +
                               " failed: " + e.what());
    }
  }

  RunTrace& tr = core.trace();
  tr.produced = produced.load();
  tr.drained = queue.size();
  tr.elapsed_s = elapsed;
  tr.workers_exited = W;
  return core.finish({{"throughput_per_s", detail::format_double(tr.throughput())}});
}

}  // namespace apam
