#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "apam/optimizer.hpp"
#include "apam/staleness.hpp"

namespace apam {

/// What the master saw when it applied g^(k). Delivered synchronously on the
/// master's context after the step and before x^(k+1) enters the history, so
/// `history.current_version() == k`.
struct StepEvent {
  std::uint64_t k;
  double alpha_k;
  std::size_t tau;
  std::span<const double> g;
  std::span<const double> x_prev;  // x^(k)
  const OptimizerState& state;     // x^(k+1), m^(k), v^(k), vhat^(k)
  const ParamHistory& history;
  const ReadMeta& meta;
};

class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(const StepEvent& e) = 0;
  virtual void on_drop(std::size_t /*tau*/) {}
};

class FunctionObserver final : public StepObserver {
 public:
  explicit FunctionObserver(std::function<void(const StepEvent&)> fn) : fn_(std::move(fn)) {}
  void on_step(const StepEvent& e) override { fn_(e); }

 private:
  std::function<void(const StepEvent&)> fn_;
};

}  // namespace apam
