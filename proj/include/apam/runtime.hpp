#pragma once

// Master/worker execution in three modes that share one master loop:
// a deterministic single-context simulation, real worker threads reading a
// lock-free parameter copy, and message passing over the binary wire codec.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "apam/optimizer.hpp"
#include "apam/problems.hpp"
#include "apam/staleness.hpp"
#include "apam/step_event.hpp"

namespace apam {

enum class RunMode { Sim, Threads, Wire };
const char* to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);

enum class DelayKind { Fixed, UniformInt, PerWorkerFixed };

struct DelayModel {
  DelayKind kind = DelayKind::Fixed;
  std::size_t tau = 0;
  std::vector<std::size_t> per_worker;

  static DelayModel fixed(std::size_t tau) { return {DelayKind::Fixed, tau, {}}; }
  static DelayModel uniform_int(std::size_t tau) { return {DelayKind::UniformInt, tau, {}}; }
  static DelayModel per_worker_fixed(std::vector<std::size_t> d) {
    return {DelayKind::PerWorkerFixed, 0, std::move(d)};
  }

  std::size_t max_delay() const;
  std::string describe() const;
  static DelayModel parse(const std::string& s);
  bool operator==(const DelayModel&) const = default;
};

enum class TransportKind { Loopback, Socket };
const char* to_string(TransportKind t);
TransportKind parse_transport(const std::string& s);

struct RunConfig {
  RunMode mode = RunMode::Sim;
  std::size_t workers = 1;
  std::size_t batch = 64;
  std::uint64_t iterations = 1000;  // K applied gradients
  StalenessPolicy policy{32, ReadMode::Consistent};
  DelayModel delay;                 // Sim only
  std::uint64_t master_seed = 0;
  /// Stop after this many delivered gradients even if fewer than K were
  /// applied; 0 means 2K + tau_max.
  std::uint64_t max_deliveries = 0;
  std::size_t queue_capacity = 0;   // Threads; 0 means 4W
  std::size_t history_capacity = 0; // 0 means large enough for the policy and delay model
  TransportKind transport = TransportKind::Loopback;
  std::size_t wire_latency = 0;     // Wire loopback: parameter push delay in ticks
  /// Objective and gradient norm are evaluated every eval_stride applied
  /// steps and at the last one; must be >= 1.
  std::uint64_t eval_stride = 1;
  std::optional<DenseVec> x0;       // default problem.initial_point(master_seed)

  void validate() const;
  std::uint64_t delivery_budget() const;
  bool operator==(const RunConfig&) const = default;
};

struct GradMsg {
  DenseVec g;
  ReadMeta meta;
  std::uint32_t worker_id = 0;
  std::uint64_t batch_seed = 0;
};

struct TraceRow {
  std::uint64_t k = 0;
  double alpha_k = 0.0;
  std::size_t tau = 0;
  std::uint64_t dropped = 0;  // drops since the previous row
  double objective = 0.0;     // F(x^(k+1))
  double grad_norm_sq = 0.0;  // ||grad F(x^(k+1))||^2
  std::uint64_t wallclock_ns = 0;
};

struct RunTrace {
  RunMode mode = RunMode::Sim;
  std::vector<TraceRow> rows;
  OptimizerState final_state;
  std::uint64_t produced = 0;
  std::uint64_t applied = 0;
  std::uint64_t dropped = 0;
  std::uint64_t drained = 0;  // produced but still queued at shutdown
  std::uint64_t transport_drops = 0;
  bool truncated = false;
  std::vector<std::uint64_t> tau_histogram;  // applied gradients per tau
  std::vector<std::size_t> applied_tau;      // tau of every applied gradient
  double elapsed_s = 0.0;
  std::size_t workers_exited = 0;
  std::vector<std::pair<std::string, std::string>> preamble;

  double throughput() const { return elapsed_s > 0.0 ? static_cast<double>(applied) / elapsed_s : 0.0; }
  std::size_t max_tau() const;
  double mean_tau() const;
  std::string histogram_line() const;
};

struct RunHooks {
  std::vector<StepObserver*> observers;
};

RunTrace run_sim(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                 const RunHooks& hooks = {});
RunTrace run_threads(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                     const RunHooks& hooks = {});
RunTrace run_wire(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
                  const RunHooks& hooks = {});
/// Dispatches on cfg.mode.
RunTrace run(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
             const RunHooks& hooks = {});

void write_trace_csv(std::ostream& os, const RunTrace& trace);
std::string trace_csv(const RunTrace& trace);

struct ParsedTrace {
  std::vector<std::pair<std::string, std::string>> preamble;
  std::vector<TraceRow> rows;
};
ParsedTrace parse_trace_csv(std::istream& is);

struct StalenessAudit {
  std::uint64_t applied = 0;
  std::size_t max_tau = 0;
  std::uint64_t violations = 0;
  bool ok() const { return violations == 0; }
};

/// Checks tau_k <= tau_max for every applied gradient of a run.
StalenessAudit audit_staleness(const RunTrace& trace, std::size_t tau_max);

}  // namespace apam
