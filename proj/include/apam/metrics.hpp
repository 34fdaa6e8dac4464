#pragma once

// Ergodic averaging, convergence-bound evaluators, analysis-side trackers and
// the invariant audit that checks the optimizer's inequalities on live runs.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apam/optimizer.hpp"
#include "apam/problems.hpp"
#include "apam/staleness.hpp"
#include "apam/step_event.hpp"
#include "apam/vectormath.hpp"

namespace apam {

// ---------------------------------------------------------------------------
// Ergodic averages

/// w_k proportional to sum_{j=k}^K alpha_j beta1^(j-k), normalized to sum 1.
std::vector<double> ergodic_weights(std::span<const double> alphas, double beta1);

DenseVec ergodic_average(std::span<const DenseVec> trajectory, std::span<const double> weights);

/// Index k in [k0, K] drawn with probability alpha_{k-1} / sum_{j=k0}^K alpha_{j-1}.
/// `alphas` holds alpha_1..alpha_K.
std::uint64_t ncvx_sample_index(std::span<const double> alphas, std::uint64_t k0,
                                std::uint64_t K, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bound evaluators

struct BoundInputs {
  std::size_t n = 0;
  double D_inf = 0.0;
  double G1 = 0.0;
  double G_inf = 0.0;
  double L = 0.0;
  double s = 0.0;
  double tau = 0.0;
  double C_F = 0.0;
  double c = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double alpha = 0.0;
  std::uint64_t K = 1;
  std::uint64_t k0 = 1;
};

/// Convex rate without delay for a constant alpha/sqrt(K) or an alpha/sqrt(k)
/// schedule.
double bound_cvx_nodelay(const BoundInputs& bi, ScheduleKind schedule);

/// Convex rate with staleness tau, schedule alpha/sqrt(K).
double bound_cvx_delay(const BoundInputs& bi);

struct NcvxBound {
  double c1 = 0.0;
  double c2 = 0.0;
  double vtilde_inv_l1 = 0.0;  // value used: min(supplied estimate, n/c)
  double value = 0.0;          // C1 + (C2/c)(sqrt(C1) + C2/c)
};

/// Setting 1: alpha_k = alpha/sqrt(K-k0+1). Setting 2: alpha_k = alpha/sqrt(k)
/// with K even, k0 = K/2 >= tau + 2.
NcvxBound ncvx_constants(const BoundInputs& bi, int setting, double e_vtilde_inv_l1);
double bound_ncvx(const BoundInputs& bi, int setting, double e_vtilde_inv_l1);

// ---------------------------------------------------------------------------
// Trackers

/// Running maxima of |g_i| (Gamma) and |grad_i F(x^(k))| (Phi), plus the
/// first strictly positive vhat_i needed to build vtilde after a run.
class GammaPhiTracker {
 public:
  explicit GammaPhiTracker(std::size_t n);

  void observe_gradient(std::span<const double> g);
  void observe_full_gradient(std::span<const double> grad_f);
  void observe_vhat(std::span<const double> vhat);

  const DenseVec& gamma() const { return gamma_; }
  const DenseVec& phi() const { return phi_; }
  bool phi_observed() const { return phi_seen_; }
  bool all_vhat_positive() const;

  /// vtilde_i = max(vhat_i, vhat_i at the first step where it was positive).
  /// Only meaningful once the run is complete.
  DenseVec vtilde(std::span<const double> vhat_k) const;

 private:
  DenseVec gamma_;
  DenseVec phi_;
  DenseVec first_positive_;
  std::vector<bool> seen_positive_;
  bool phi_seen_ = false;
};

struct GradientStats {
  std::uint64_t count = 0;
  double max_inf = 0.0;   // max_k ||g^(k)||_inf
  double sum_l1 = 0.0;    // sum_k ||g^(k)||_1
  std::size_t max_nnz = 0;
  std::size_t max_tau = 0;

  void observe(std::span<const double> g, std::size_t tau);
  double mean_l1() const { return count ? sum_l1 / static_cast<double>(count) : 0.0; }
};

// ---------------------------------------------------------------------------
// Audit log and recorder

struct StepAudit {
  std::uint64_t k = 0;
  double alpha_k = 0.0;
  std::size_t tau = 0;
  double step_norm = 0.0;  // ||x^(k+1) - x^(k)||
  double step_bound = 0.0; // alpha_k ||m^(k) / sqrt(vhat^(k))||
  double vhat_min_increment = 0.0;
  std::size_t g_nnz = 0;
  MixtureReport mixture;
};

struct StateSnapshot {
  std::uint64_t k = 0;  // moments are m^(k), vhat^(k); x is x^(k+1)
  DenseVec x, m, v, vhat;
};

struct AuditLog {
  HyperParams hp;
  BoxConstraint box;
  std::size_t tau_max = 0;
  std::size_t stride = 10;
  std::vector<StepAudit> steps;
  std::vector<StateSnapshot> snapshots;
  std::vector<DenseVec> gradients;  // g^(1) .. g^(K)
  std::size_t drops = 0;
};

struct RecorderOptions {
  bool audit = true;
  std::size_t audit_stride = 10;
  /// When set, Phi is tracked from full gradients every audit_stride steps.
  const Problem* full_grad_problem = nullptr;
  /// Keep vhat^(k) at this k (e.g. k0 - 1) for the vtilde floor estimate.
  std::uint64_t capture_vhat_at = 0;
};

/// Master-side observer that records everything the audit and the bound
/// estimators need.
class RunRecorder final : public StepObserver {
 public:
  RunRecorder(std::size_t n, HyperParams hp, BoxConstraint box, std::size_t tau_max,
              RecorderOptions opt = {});

  void on_step(const StepEvent& e) override;
  void on_drop(std::size_t tau) override;

  const AuditLog& log() const { return log_; }
  AuditLog& log() { return log_; }
  const GammaPhiTracker& tracker() const { return tracker_; }
  const GradientStats& stats() const { return stats_; }
  const std::optional<DenseVec>& captured_vhat() const { return captured_vhat_; }
  const DenseVec& last_vhat() const { return last_vhat_; }

 private:
  RecorderOptions opt_;
  AuditLog log_;
  GammaPhiTracker tracker_;
  GradientStats stats_;
  std::optional<DenseVec> captured_vhat_;
  DenseVec last_vhat_;
};

enum class CheckStatus { Pass, Fail, Skipped };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::size_t evaluated = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;  // min over evaluations of (rhs - lhs)
  std::string note;
};

struct AuditReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult& get(const std::string& name) const;
  std::string to_text() const;
  std::string to_csv() const;
};

/// Evaluates every inequality on the recorded log with kAuditSlack absolute
/// slack. Throws std::invalid_argument if snapshots or gradients are missing.
AuditReport invariant_audit(const AuditLog& log);

// ---------------------------------------------------------------------------
// Empirical bound inputs

enum class Provenance { Exact, Estimated, Supplied, Unavailable };
const char* to_string(Provenance p);

struct BoundEstimates {
  BoundInputs inputs;
  std::map<std::string, Provenance> provenance;
  double vtilde_inv_l1 = 0.0;  // one-sample estimate of E||vtilde^(k0-1)^(-1/2)||_1
  double n_over_c = 0.0;

  bool available(const std::string& field) const;
};

struct SuppliedConstants {
  std::optional<double> L;
  std::optional<double> C_F;
};

/// Estimates G_inf, G1, s, tau and c from a finished run; D_inf comes from the
/// box when it is bounded. L and C_F are never estimated.
BoundEstimates estimate_inputs(const RunRecorder& rec, const HyperParams& hp,
                               const BoxConstraint& box, std::uint64_t K, std::uint64_t k0,
                               const SuppliedConstants& supplied);

}  // namespace apam
