#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <deque>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "apam/rng.hpp"
#include "apam/wire.hpp"
#include "master.hpp"

namespace apam {

namespace {

GradMsg gradient_from_frame(const WireFrame& f) {
  if (f.type != MsgType::Gradient) throw std::runtime_error("wire: master expected a gradient frame");
  GradMsg msg;
  msg.worker_id = f.worker_id;
  msg.g = f.payload;
  msg.meta.per_coord_version.assign(f.payload.size(), static_cast<Version>(f.version));
  return msg;
}

WireFrame params_frame(const detail::MasterCore& core, std::uint32_t w) {
  return {MsgType::Params, static_cast<std::uint64_t>(core.version()), w, core.state().x};
}

/// Worker side of the protocol, shared by both transports: a params frame
/// updates the local copy, a shutdown frame ends the worker.
struct WorkerEndpoint {
  std::uint32_t id = 0;
  std::optional<WireFrame> params;
  std::uint64_t counter = 0;
  bool alive = true;

  void receive(const WireFrame& f) {
    if (f.type == MsgType::Shutdown) {
      alive = false;
    } else if (f.type == MsgType::Params) {
      params = f;
    } else {
      throw std::runtime_error("wire: worker received a gradient frame");
    }
  }

  std::vector<std::uint8_t> compute(const Problem& problem, const RunConfig& cfg) {
    const std::uint64_t seed = batch_seed(cfg.master_seed, id, counter++);
    WireFrame g{MsgType::Gradient, params->version, id,
                problem.minibatch_grad(params->payload, cfg.batch, seed)};
    return encode_frame(g);
  }
};

// In-process transport driven by a tick counter. Each tick every worker
// reads the parameter frames that have arrived and sends one gradient; the
// master then consumes all gradients in arrival order and pushes fresh
// parameters that arrive 1 + wire_latency ticks later.
RunTrace run_loopback(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                      const RunHooks& hooks) {
  detail::MasterCore core(problem, hp, cfg, hooks, /*backfill=*/false);
  const std::size_t W = cfg.workers;
  struct Pending {
    std::uint64_t due;
    std::vector<std::uint8_t> bytes;
  };
  std::vector<std::deque<Pending>> down(W);
  std::deque<std::vector<std::uint8_t>> up;
  std::vector<WorkerEndpoint> workers(W);
  for (std::size_t w = 0; w < W; ++w) {
    workers[w].id = static_cast<std::uint32_t>(w);
    down[w].push_back({0, encode_frame(params_frame(core, workers[w].id))});
  }

  std::uint64_t tick = 0;
  std::size_t exited = 0;
  std::optional<std::uint64_t> shutdown_tick;
  std::uint64_t shutdown_ticks = 0;
  for (; exited < W; ++tick) {
    for (std::size_t w = 0; w < W; ++w) {
      auto& dq = down[w];
      while (!dq.empty() && dq.front().due <= tick) {
        const bool was_alive = workers[w].alive;
        if (was_alive) workers[w].receive(decode_frame(dq.front().bytes));
        if (was_alive && !workers[w].alive) ++exited;
        dq.pop_front();
      }
      if (workers[w].alive && workers[w].params) {
        up.push_back(workers[w].compute(problem, cfg));
        ++core.trace().produced;
      }
    }
    if (shutdown_tick) {
      shutdown_ticks = tick - *shutdown_tick;
      continue;
    }
    while (!up.empty() && !core.should_stop()) {
      const GradMsg msg = gradient_from_frame(decode_frame(up.front()));
      up.pop_front();
      if (core.deliver(msg, tick)) {
        const std::uint64_t due = tick + 1 + cfg.wire_latency;
        for (std::size_t w = 0; w < W; ++w) {
          down[w].push_back({due, encode_frame(params_frame(core, workers[w].id))});
        }
      }
    }
    if (core.should_stop()) {
      shutdown_tick = tick;
      const std::uint64_t due = tick + 1 + cfg.wire_latency;
      for (std::size_t w = 0; w < W; ++w) {
        down[w].push_back({due, encode_frame({MsgType::Shutdown, 0, workers[w].id, {}})});
      }
    }
  }
  RunTrace& tr = core.trace();
  tr.drained = up.size();
  tr.workers_exited = exited;
  tr.elapsed_s = 0.0;
  return core.finish({{"transport", "loopback"},
                      {"wire_latency", std::to_string(cfg.wire_latency)},
                      {"shutdown_ticks", std::to_string(shutdown_ticks)}});
}

void write_all(int fd, const std::vector<std::uint8_t>& bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t r = ::send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("wire: send failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(r);
  }
}

void read_exact(int fd, std::uint8_t* out, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t r = ::read(fd, out + off, len - off);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("wire: read failed: ") + std::strerror(errno));
    }
    if (r == 0) throw std::runtime_error("wire: peer closed the connection");
    off += static_cast<std::size_t>(r);
  }
}

WireFrame read_frame(int fd) {
  std::vector<std::uint8_t> buf(kFrameHeaderSize);
  read_exact(fd, buf.data(), buf.size());
  const std::size_t n = peek_payload_length(buf);
  buf.resize(frame_size(n));
  read_exact(fd, buf.data() + kFrameHeaderSize, buf.size() - kFrameHeaderSize);
  return decode_frame(buf);
}

class FdPair {
 public:
  FdPair() {
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds_) != 0) {
      throw std::runtime_error(std::string("wire: socketpair failed: ") + std::strerror(errno));
    }
  }
  FdPair(const FdPair&) = delete;
  FdPair& operator=(const FdPair&) = delete;
  ~FdPair() {
    ::close(fds_[0]);
    ::close(fds_[1]);
  }
  int master() const { return fds_[0]; }
  int worker() const { return fds_[1]; }

 private:
  int fds_[2];
};

// One stream socket per worker. Request/reply: the master answers each
// gradient with the current parameters, so staleness comes from the other
// workers' updates while a gradient is in flight.
RunTrace run_socket(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                    const RunHooks& hooks) {
  detail::MasterCore core(problem, hp, cfg, hooks, /*backfill=*/false);
  const std::size_t W = cfg.workers;
  std::vector<std::unique_ptr<FdPair>> links;
  for (std::size_t w = 0; w < W; ++w) links.push_back(std::make_unique<FdPair>());

  std::atomic<std::uint64_t> produced{0};
  std::atomic<std::size_t> exited{0};
  std::mutex err_mu;
  std::exception_ptr worker_error;

  auto worker = [&](std::uint32_t w) {
    WorkerEndpoint ep;
    ep.id = w;
    try {
      const int fd = links[w]->worker();
      while (ep.alive) {
        ep.receive(read_frame(fd));
        if (!ep.alive) break;
        write_all(fd, ep.compute(problem, cfg));
        produced.fetch_add(1);
      }
      exited.fetch_add(1);
    } catch (...) {
      std::lock_guard lk(err_mu);
      if (!worker_error) worker_error = std::current_exception();
    }
  };

  detail::Stopwatch clock;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < W; ++w) pool.emplace_back(worker, static_cast<std::uint32_t>(w));

  std::vector<pollfd> pfds(W);
  auto shutdown = [&] {
    for (std::size_t w = 0; w < W; ++w) {
      try {
        write_all(links[w]->master(), encode_frame({MsgType::Shutdown, 0, static_cast<std::uint32_t>(w), {}}));
      } catch (const std::exception&) {
        ::shutdown(links[w]->master(), SHUT_RDWR);
      }
    }
    for (auto& t : pool) t.join();
  };

  try {
    for (std::size_t w = 0; w < W; ++w) {
      write_all(links[w]->master(), encode_frame(params_frame(core, static_cast<std::uint32_t>(w))));
      pfds[w] = {links[w]->master(), POLLIN, 0};
    }
    while (!core.should_stop()) {
      const int r = ::poll(pfds.data(), pfds.size(), 1000);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error(std::string("wire: poll failed: ") + std::strerror(errno));
      }
      {
        std::lock_guard lk(err_mu);
        if (worker_error) break;
      }
      for (std::size_t w = 0; w < W && !core.should_stop(); ++w) {
        if (pfds[w].revents & (POLLERR | POLLHUP | POLLNVAL)) {
          throw std::runtime_error("wire: link to worker " + std::to_string(w) + " failed");
        }
        if (!(pfds[w].revents & POLLIN)) continue;
        const GradMsg msg = gradient_from_frame(read_frame(pfds[w].fd));
        core.deliver(msg, clock.ns());
        if (!core.should_stop()) {
          write_all(pfds[w].fd, encode_frame(params_frame(core, static_cast<std::uint32_t>(w))));
            }
      }
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
      throw std::runtime_error(std::string("wire run aborted: ") + e.what());
    }
  }
  RunTrace& tr = core.trace();
  tr.produced = produced.load();
  tr.drained = tr.produced - tr.applied - tr.dropped;
  tr.elapsed_s = elapsed;
  tr.workers_exited = exited.load();
  return core.finish({{"transport", "socket"},
                      {"throughput_per_s", detail::format_double(tr.throughput())}});
}

}  // namespace

RunTrace run_wire(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                  const RunHooks& hooks) {
  if (cfg.mode != RunMode::Wire) throw std::invalid_argument("run_wire: mode must be wire");
  return cfg.transport == TransportKind::Loopback ? run_loopback(problem, hp, cfg, hooks)
                                                  : run_socket(problem, hp, cfg, hooks);
}

}  // namespace apam
