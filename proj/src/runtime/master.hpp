#pragma once

#include <chrono>
#include <string>

#include "apam/runtime.hpp"

namespace apam::detail {

/// The single writer of optimizer state and parameter history. Every mode
/// feeds its gradients through deliver().
class MasterCore {
 public:
  MasterCore(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
             const RunHooks& hooks, bool backfill);

  /// Admits or drops msg; returns true when the gradient was applied.
  bool deliver(const GradMsg& msg, std::uint64_t clock_ns);

  bool done() const { return trace_.applied >= cfg_.iterations; }
  bool budget_exhausted() const { return deliveries_ >= budget_; }
  bool should_stop() const { return done() || budget_exhausted(); }

  const ParamHistory& history() const { return history_; }
  const OptimizerState& state() const { return state_; }
  Version version() const { return history_.current_version(); }
  RunTrace& trace() { return trace_; }

  /// Fills totals and the preamble; `extra` entries are appended.
  RunTrace finish(std::vector<std::pair<std::string, std::string>> extra = {});

 private:
  const Problem& problem_;
  HyperParams hp_;
  const RunConfig& cfg_;
  const RunHooks& hooks_;
  OptimizerState state_;
  ParamHistory history_;
  RunTrace trace_;
  std::uint64_t deliveries_ = 0;
  std::uint64_t budget_;
  std::uint64_t drops_since_row_ = 0;
};

std::size_t history_capacity_for(const RunConfig& cfg);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::uint64_t ns() const {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                          std::chrono::steady_clock::now() - start_)
                                          .count());
  }
  double seconds() const { return static_cast<double>(ns()) * 1e-9; }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string format_double(double v);

}  // namespace apam::detail
