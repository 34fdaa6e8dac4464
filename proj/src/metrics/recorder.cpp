#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apam/metrics.hpp"

namespace apam {

GammaPhiTracker::GammaPhiTracker(std::size_t n)
    : gamma_(n, 0.0), phi_(n, 0.0), first_positive_(n, 0.0), seen_positive_(n, false) {}

void GammaPhiTracker::observe_gradient(std::span<const double> g) {
  require_same_size(g.size(), gamma_.size(), "GammaPhiTracker::observe_gradient");
  for (std::size_t i = 0; i < g.size(); ++i) gamma_[i] = std::max(gamma_[i], std::abs(g[i]));
}

void GammaPhiTracker::observe_full_gradient(std::span<const double> grad_f) {
  require_same_size(grad_f.size(), phi_.size(), "GammaPhiTracker::observe_full_gradient");
  for (std::size_t i = 0; i < grad_f.size(); ++i) phi_[i] = std::max(phi_[i], std::abs(grad_f[i]));
  phi_seen_ = true;
}

void GammaPhiTracker::observe_vhat(std::span<const double> vhat) {
  require_same_size(vhat.size(), first_positive_.size(), "GammaPhiTracker::observe_vhat");
  for (std::size_t i = 0; i < vhat.size(); ++i) {
    if (!seen_positive_[i] && vhat[i] > 0.0) {
      seen_positive_[i] = true;
      first_positive_[i] = vhat[i];
    }
  }
}

bool GammaPhiTracker::all_vhat_positive() const {
  return std::all_of(seen_positive_.begin(), seen_positive_.end(), [](bool b) { return b; });
}

DenseVec GammaPhiTracker::vtilde(std::span<const double> vhat_k) const {
  return max_vec(vhat_k, first_positive_);
}

void GradientStats::observe(std::span<const double> g, std::size_t tau) {
  ++count;
  max_inf = std::max(max_inf, norm_inf(g));
  sum_l1 += norm1(g);
  max_nnz = std::max(max_nnz, count_nonzero(g));
  max_tau = std::max(max_tau, tau);
}

RunRecorder::RunRecorder(std::size_t n, HyperParams hp, BoxConstraint box, std::size_t tau_max,
                         RecorderOptions opt)
    : opt_(opt), tracker_(n), last_vhat_(n, 0.0) {
  if (opt_.audit_stride == 0) throw std::invalid_argument("RunRecorder: audit_stride must be >= 1");
  require_same_size(box.size(), n, "RunRecorder: box");
  log_.hp = hp;
  log_.box = std::move(box);
  log_.tau_max = tau_max;
  log_.stride = opt_.audit_stride;
}

void RunRecorder::on_drop(std::size_t /*tau*/) { ++log_.drops; }

void RunRecorder::on_step(const StepEvent& e) {
  const OptimizerState& st = e.state;
  stats_.observe(e.g, e.tau);
  tracker_.observe_gradient(e.g);
  tracker_.observe_vhat(st.vhat);
  const bool on_stride = (e.k - 1) % opt_.audit_stride == 0;
  if (opt_.full_grad_problem != nullptr && on_stride) {
    tracker_.observe_full_gradient(opt_.full_grad_problem->full_grad(e.x_prev));
  }
  if (opt_.capture_vhat_at != 0 && e.k == opt_.capture_vhat_at) captured_vhat_ = st.vhat;

  if (opt_.audit) {
    StepAudit a;
    a.k = e.k;
    a.alpha_k = e.alpha_k;
    a.tau = e.tau;
    a.step_norm = norm2(sub(st.x, e.x_prev));
    a.step_bound = e.alpha_k * norm2(safe_div(st.m, sqrt_vec(st.vhat)));
    double inc = kInf;
    for (std::size_t i = 0; i < st.vhat.size(); ++i) inc = std::min(inc, st.vhat[i] - last_vhat_[i]);
    a.vhat_min_increment = st.vhat.empty() ? 0.0 : inc;
    a.g_nnz = count_nonzero(e.g);
    a.mixture = mixture_bounds_check(e.history, e.meta);
    log_.steps.push_back(a);
    log_.gradients.emplace_back(e.g.begin(), e.g.end());
    if (on_stride) log_.snapshots.push_back({e.k, st.x, st.m, st.v, st.vhat});
  }
  last_vhat_ = st.vhat;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Exact: return "exact";
    case Provenance::Estimated: return "estimated";
    case Provenance::Supplied: return "assumed";
    case Provenance::Unavailable: return "unavailable";
  }
  return "?";
}

bool BoundEstimates::available(const std::string& field) const {
  auto it = provenance.find(field);
  return it != provenance.end() && it->second != Provenance::Unavailable;
}

BoundEstimates estimate_inputs(const RunRecorder& rec, const HyperParams& hp,
                               const BoxConstraint& box, std::uint64_t K, std::uint64_t k0,
                               const SuppliedConstants& supplied) {
  BoundEstimates out;
  BoundInputs& bi = out.inputs;
  const GradientStats& gs = rec.stats();
  bi.n = box.size();
  bi.beta1 = hp.beta1;
  bi.beta2 = hp.beta2;
  bi.alpha = hp.schedule.alpha;
  bi.K = K;
  bi.k0 = k0;
  for (const char* f : {"beta1", "beta2", "alpha", "K", "k0"}) out.provenance[f] = Provenance::Exact;

  if (box.is_bounded()) {
    bi.D_inf = box.diameter_inf();
    out.provenance["D_inf"] = Provenance::Exact;
  } else {
    out.provenance["D_inf"] = Provenance::Unavailable;
  }
  bi.G_inf = gs.max_inf;
  bi.G1 = gs.mean_l1();
  bi.s = static_cast<double>(gs.max_nnz);
  bi.tau = static_cast<double>(gs.max_tau);
  for (const char* f : {"G_inf", "G1", "s", "tau"}) out.provenance[f] = Provenance::Estimated;

  if (supplied.L) {
    bi.L = *supplied.L;
    out.provenance["L"] = Provenance::Supplied;
  } else {
    out.provenance["L"] = Provenance::Unavailable;
  }
  if (supplied.C_F) {
    bi.C_F = *supplied.C_F;
    out.provenance["C_F"] = Provenance::Supplied;
  } else {
    out.provenance["C_F"] = Provenance::Unavailable;
  }

  // vtilde at k0 - 1; vhat^(0) is the zero vector.
  std::optional<DenseVec> vhat_prev;
  if (k0 >= 2 && k0 - 1 == K) {
    vhat_prev = rec.last_vhat();
  } else if (k0 >= 2 && rec.captured_vhat()) {
    vhat_prev = *rec.captured_vhat();
  } else if (k0 == 1) {
    vhat_prev = DenseVec(bi.n, 0.0);
  }
  out.provenance["c"] = Provenance::Unavailable;
  if (vhat_prev) {
    const DenseVec vt = rec.tracker().vtilde(*vhat_prev);
    double c = kInf;
    double inv_l1 = 0.0;
    for (double vi : vt) {
      c = std::min(c, std::sqrt(vi));
      inv_l1 += vi > 0.0 ? 1.0 / std::sqrt(vi) : kInf;
    }
    if (!vt.empty() && c > 0.0) {
      bi.c = c;
      out.vtilde_inv_l1 = inv_l1;
      out.n_over_c = static_cast<double>(bi.n) / c;
      out.provenance["c"] = Provenance::Estimated;
    }
  }
  return out;
}

}  // namespace apam
