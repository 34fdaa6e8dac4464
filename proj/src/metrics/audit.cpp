#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "apam/metrics.hpp"

namespace apam {

namespace {

class Check {
 public:
  explicit Check(std::string name) { r_.name = std::move(name); r_.worst_slack = kInf; }

  void eval(double lhs, double rhs) {
    const double slack = rhs - lhs;
    ++r_.evaluated;
    r_.worst_slack = std::min(r_.worst_slack, slack);
    if (!(slack >= -kAuditSlack)) ++r_.violations;
  }

  void skip(std::string why) {
    r_.status = CheckStatus::Skipped;
    r_.note = std::move(why);
  }

  CheckResult done() {
    if (r_.status != CheckStatus::Skipped) {
      r_.status = r_.violations == 0 ? CheckStatus::Pass : CheckStatus::Fail;
    }
    if (r_.evaluated == 0) r_.worst_slack = 0.0;
    return r_;
  }

 private:
  CheckResult r_;
};

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

}  // namespace

bool AuditReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

const CheckResult& AuditReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("AuditReport: no check named " + name);
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << status_name(c.status) << "  " << c.name << "  evaluated=" << c.evaluated
       << " violations=" << c.violations << " worst_slack=" << c.worst_slack;
    if (!c.note.empty()) os << "  (" << c.note << ")";
    os << '\n';
  }
  os << (passed() ? "audit: pass" : "audit: FAIL") << '\n';
  return os.str();
}

std::string AuditReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "check,status,evaluated,violations,worst_slack\n";
  for (const auto& c : checks) {
    os << c.name << ',' << status_name(c.status) << ',' << c.evaluated << ',' << c.violations << ','
       << c.worst_slack << '\n';
  }
  return os.str();
}

AuditReport invariant_audit(const AuditLog& log) {
  const std::size_t K = log.steps.size();
  if (log.gradients.size() != K) {
    throw std::invalid_argument("invariant_audit: missing gradients (" +
                                std::to_string(log.gradients.size()) + " for " +
                                std::to_string(K) + " steps)");
  }
  if (log.stride == 0) throw std::invalid_argument("invariant_audit: stride must be >= 1");
  const std::size_t expected = K == 0 ? 0 : (K - 1) / log.stride + 1;
  if (log.snapshots.size() != expected) {
    throw std::invalid_argument("invariant_audit: missing snapshots (" +
                                std::to_string(log.snapshots.size()) + " of " +
                                std::to_string(expected) + ")");
  }
  for (std::size_t t = 0; t < K; ++t) {
    if (log.steps[t].k != t + 1) throw std::invalid_argument("invariant_audit: steps out of order");
  }
  for (std::size_t j = 0; j < expected; ++j) {
    if (log.snapshots[j].k != j * log.stride + 1) {
      throw std::invalid_argument("invariant_audit: missing snapshot at k=" +
                                  std::to_string(j * log.stride + 1));
    }
  }

  const double b1 = log.hp.beta1;
  const double b2c = 1.0 - log.hp.beta2;

  Check monotone("vhat_monotone");
  Check moments("moment_order");
  Check step_norm("step_norm_bound");
  Check g_over("grad_over_vhat_bound");
  Check m_over("momentum_over_vhat_bound");
  Check m_over_sq("momentum_over_vhat_sq_bound");
  Check m_gamma("momentum_gamma_bound");
  Check v_gamma("vhat_gamma_bound");
  Check mix_norm("mixture_norm_bound");
  Check mix_sq("mixture_sq_bound");
  Check stale("staleness_bound");
  Check feasible("box_feasible");

  for (const auto& s : log.steps) {
    monotone.eval(0.0, s.vhat_min_increment);
    step_norm.eval(s.step_norm, s.step_bound);
    mix_norm.eval(s.mixture.lhs_norm, s.mixture.rhs_norm);
    mix_sq.eval(s.mixture.lhs_sq, s.mixture.rhs_sq);
    stale.eval(static_cast<double>(s.tau), static_cast<double>(log.tau_max));
  }

  // Running sums over j <= k for the momentum bounds, indexed by step.
  std::vector<double> sum_sqrt_nnz(K), sum_nnz(K);
  {
    double a = 0.0, b = 0.0;
    for (std::size_t t = 0; t < K; ++t) {
      const auto nnz = static_cast<double>(log.steps[t].g_nnz);
      a = b1 * a + std::sqrt(nnz);
      b = b1 * b + nnz;
      sum_sqrt_nnz[t] = a;
      sum_nnz[t] = b;
    }
  }

  DenseVec gamma(log.box.size(), 0.0);
  std::size_t next_grad = 0;
  const DenseVec* prev_vhat = nullptr;
  const bool with_eps = log.hp.eps > 0.0;
  for (const auto& snap : log.snapshots) {
    const std::size_t t = snap.k - 1;
    for (; next_grad <= t; ++next_grad) {
      const DenseVec& g = log.gradients[next_grad];
      for (std::size_t i = 0; i < g.size(); ++i) gamma[i] = std::max(gamma[i], std::abs(g[i]));
    }
    if (prev_vhat) {
      for (std::size_t i = 0; i < snap.vhat.size(); ++i) monotone.eval((*prev_vhat)[i], snap.vhat[i]);
    }
    prev_vhat = &snap.vhat;
    for (std::size_t i = 0; i < snap.v.size(); ++i) {
      moments.eval(0.0, snap.v[i]);
      moments.eval(snap.v[i], snap.vhat[i]);
      m_gamma.eval(std::abs(snap.m[i]), gamma[i]);
      v_gamma.eval(snap.vhat[i], gamma[i] * gamma[i]);
    }
    feasible.eval(snap.x.size() == log.box.size() && log.box.contains(snap.x) ? 0.0 : 1.0, 0.0);

    if (!with_eps) {
      const DenseVec root = sqrt_vec(snap.vhat);
      for (std::size_t j = 0; j <= t; ++j) {
        const double lhs = norm2(safe_div(log.gradients[j], root));
        g_over.eval(lhs, std::sqrt(static_cast<double>(log.steps[j].g_nnz) / b2c));
      }
      const DenseVec ratio = safe_div(snap.m, root);
      const double r2 = norm_sq(ratio);
      m_over.eval(std::sqrt(r2), (1.0 - b1) * sum_sqrt_nnz[t] / std::sqrt(b2c));
      m_over_sq.eval(r2, (1.0 - b1) / b2c * sum_nnz[t]);
    }
  }
  if (with_eps) {
    const std::string why = "eps > 0 changes the denominator";
    g_over.skip(why);
    m_over.skip(why);
    m_over_sq.skip(why);
  }

  AuditReport rep;
  for (Check* c : {&monotone, &moments, &step_norm, &g_over, &m_over, &m_over_sq, &m_gamma, &v_gamma,
                   &mix_norm, &mix_sq, &stale, &feasible}) {
    rep.checks.push_back(c->done());
  }
  return rep;
}

}  // namespace apam
