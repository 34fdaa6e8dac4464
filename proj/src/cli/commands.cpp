#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "apam/cli.hpp"
#include "apam/metrics.hpp"

namespace apam {

namespace {

HyperParams hyper_params(const ExperimentConfig& cfg) {
  HyperParams hp = cfg.hp;
  hp.schedule.horizon = cfg.run.iterations;
  return hp;
}

Dataset load_or_synthesize(const ProblemSpec& spec, std::size_t classes) {
  if (!spec.dataset.empty()) return load_libsvm(spec.dataset);
  return synth_classification(spec.samples, spec.features, spec.separable, spec.data_seed, classes);
}

void write_trace_file(const RunTrace& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
  write_trace_csv(out, tr);
}

void print_summary(std::ostream& out, const RunTrace& tr, const Problem& problem) {
  out << "mode=" << to_string(tr.mode) << " applied=" << tr.applied << " dropped=" << tr.dropped
      << " produced=" << tr.produced << " drained=" << tr.drained
      << " final_objective=" << problem.full_value(tr.final_state.x)
      << (tr.truncated ? " truncated" : "") << '\n';
  if (tr.mode != RunMode::Sim) {
    out << "throughput_per_s=" << tr.throughput() << '\n' << tr.histogram_line() << '\n';
  }
}

}  // namespace

std::unique_ptr<Problem> build_problem(const ProblemSpec& spec, std::uint64_t init_seed) {
  std::unique_ptr<Problem> p;
  switch (spec.kind) {
    case ProblemKind::Logistic: p = logistic(load_or_synthesize(spec, 2), spec.l2); break;
    case ProblemKind::Mlp2: p = mlp2(load_or_synthesize(spec, spec.classes), spec.hidden, init_seed); break;
    case ProblemKind::Quadratic:
      p = synth_quadratic(spec.features, spec.samples, spec.linear_fraction, spec.noise, spec.data_seed);
      break;
  }
  const bool box_given = std::isfinite(spec.box_lower) || std::isfinite(spec.box_upper);
  if (box_given) p->set_box(BoxConstraint::uniform(p->dimension(), spec.box_lower, spec.box_upper));
  return p;
}

std::string sweep_path(const std::string& output, std::size_t tau) {
  const auto slash = output.find_last_of('/');
  const auto dot = output.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? output.substr(0, dot) : output;
  const std::string ext = has_ext ? output.substr(dot) : ".csv";
  return stem + "_tau" + std::to_string(tau) + ext;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const HyperParams hp = hyper_params(cfg);
  auto problem = build_problem(cfg.problem, cfg.run.master_seed);
  RecorderOptions opt;
  opt.audit = cfg.audit.enabled;
  opt.audit_stride = cfg.audit.stride;
  RunRecorder rec(problem->dimension(), hp, problem->box(), cfg.run.policy.tau_max, opt);
  RunHooks hooks;
  if (cfg.audit.enabled) hooks.observers.push_back(&rec);

  const RunTrace tr = run(*problem, hp, cfg.run, hooks);
  write_trace_file(tr, cfg.output);
  out << "trace written to " << cfg.output << '\n';
  print_summary(out, tr, *problem);

  int rc = 0;
  const StalenessAudit sa = audit_staleness(tr, cfg.run.policy.tau_max);
  if (!sa.ok()) {
    err << "staleness bound violated by " << sa.violations << " applied gradients\n";
    rc = 1;
  }
  if (cfg.audit.enabled) {
    const AuditReport rep = invariant_audit(rec.log());
    out << rep.to_text();
    if (!rep.passed()) rc = 1;
  }
  return rc;
}

int cmd_simulate(const ExperimentConfig& cfg, const std::vector<std::size_t>& taus, std::ostream& out,
                 std::ostream& err) {
  if (taus.empty()) {
    err << "simulate: empty tau list\n";
    return 2;
  }
  const HyperParams hp = hyper_params(cfg);
  auto problem = build_problem(cfg.problem, cfg.run.master_seed);
  int rc = 0;
  for (std::size_t tau : taus) {
    RunConfig rc_cfg = cfg.run;
    rc_cfg.mode = RunMode::Sim;
    rc_cfg.delay = DelayModel::fixed(tau);
    const RunTrace tr = run_sim(*problem, hp, rc_cfg);
    const std::string path = sweep_path(cfg.output, tau);
    write_trace_file(tr, path);
    out << "tau=" << tau << " -> " << path << "  applied=" << tr.applied << " dropped=" << tr.dropped
        << " final_objective=" << problem->full_value(tr.final_state.x) << '\n';
    if (!audit_staleness(tr, rc_cfg.policy.tau_max).ok()) {
      err << "tau=" << tau << ": staleness bound violated\n";
      rc = 1;
    }
  }
  return rc;
}

int cmd_verify(const ExperimentConfig& cfg, std::size_t seeds, std::ostream& out, std::ostream& err) {
  if (seeds == 0) {
    err << "verify: --seeds must be >= 1\n";
    return 2;
  }
  const HyperParams hp = hyper_params(cfg);
  std::size_t failed = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    RunConfig rc_cfg = cfg.run;
    rc_cfg.master_seed = cfg.run.master_seed + s;
    auto problem = build_problem(cfg.problem, rc_cfg.master_seed);
    RecorderOptions opt;
    opt.audit_stride = cfg.audit.stride;
    RunRecorder rec(problem->dimension(), hp, problem->box(), rc_cfg.policy.tau_max, opt);
    RunHooks hooks{{&rec}};
    const RunTrace tr = run(*problem, hp, rc_cfg, hooks);
    const AuditReport rep = invariant_audit(rec.log());
    const StalenessAudit sa = audit_staleness(tr, rc_cfg.policy.tau_max);
    const bool ok = rep.passed() && sa.ok();
    out << "seed " << rc_cfg.master_seed << ": " << (ok ? "pass" : "FAIL") << " (applied " << tr.applied
        << ", max tau " << sa.max_tau << ")\n";
    if (!ok) {
      ++failed;
      out << rep.to_text();
    }
  }
  out << (failed ? "verify: FAIL" : "verify: pass") << " (" << seeds - failed << "/" << seeds << " seeds)\n";
  return failed ? 1 : 0;
}

int cmd_gradcheck(const ExperimentConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  constexpr double h = 1e-6;
  std::vector<ProblemKind> kinds{cfg.problem.kind};
  const bool sweep = cfg.problem.dataset.empty();
  if (sweep) kinds = {ProblemKind::Logistic, ProblemKind::Mlp2, ProblemKind::Quadratic};
  int rc = 0;
  for (ProblemKind kind : kinds) {
    ProblemSpec spec = cfg.problem;
    // A 1e-9 check of a quadratic needs |F| small enough that eps |F| / h < 1e-9.
    if (sweep && kind == ProblemKind::Quadratic && kind != cfg.problem.kind) {
      spec.features = std::min<std::size_t>(spec.features, 10);
    }
    spec.kind = kind;
    auto problem = build_problem(spec, cfg.run.master_seed);
    const DenseVec x = problem->initial_point(cfg.run.master_seed);
    const double tol = kind == ProblemKind::Quadratic ? 1e-9 : 1e-5;
    const double rel = grad_check(*problem, x, h, cfg.run.master_seed);
    const double floor = std::numeric_limits<double>::epsilon() * std::abs(problem->full_value(x)) / (2 * h);
    const bool ok = rel <= tol;
    out << to_string(kind) << " (n=" << problem->dimension() << "): max relative error " << rel
        << " (tolerance " << tol << ", rounding floor ~" << floor << ") " << (ok ? "pass" : "FAIL") << '\n';
    if (!ok) rc = 1;
  }
  return rc;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const HyperParams hp = hyper_params(cfg);
  auto problem = build_problem(cfg.problem, cfg.run.master_seed);
  const std::uint64_t K = cfg.run.iterations;
  const std::uint64_t k0 = cfg.bounds.k0 ? cfg.bounds.k0 : std::max<std::uint64_t>(2, K / 2);

  RecorderOptions opt;
  opt.audit = false;
  opt.capture_vhat_at = k0 - 1;
  RunRecorder rec(problem->dimension(), hp, problem->box(), cfg.run.policy.tau_max, opt);
  const std::vector<double> alphas = alpha_sequence(hp.schedule, K);
  const std::vector<double> w = ergodic_weights(alphas, hp.beta1);
  DenseVec xbar(problem->dimension(), 0.0);
  FunctionObserver avg([&](const StepEvent& e) {
    for (std::size_t i = 0; i < xbar.size(); ++i) xbar[i] += w[e.k - 1] * e.x_prev[i];
  });
  RunHooks hooks{{&rec, &avg}};
  const RunTrace tr = run(*problem, hp, cfg.run, hooks);
  if (tr.applied < K) {
    out << "run applied " << tr.applied << " of " << K << " gradients; bounds need a complete run\n";
    return 1;
  }

  BoundEstimates est = estimate_inputs(rec, hp, problem->box(), K, k0, {cfg.bounds.L, cfg.bounds.C_F});
  if (const auto* q = dynamic_cast<const QuadraticProblem*>(problem.get())) {
    est.inputs.G_inf = q->grad_inf_bound();
    est.inputs.G1 = q->grad_l1_bound();
    est.inputs.L = q->lipschitz();
    est.inputs.s = static_cast<double>(q->dimension());
    for (const char* f : {"G_inf", "G1", "L", "s"}) est.provenance[f] = Provenance::Exact;
  }
  const BoundInputs& bi = est.inputs;
  out << "inputs:\n";
  auto row = [&](const char* name, double v) {
    out << "  " << name << " = " << v << "  [" << to_string(est.provenance.at(name)) << "]\n";
  };
  row("D_inf", bi.D_inf);
  row("G_inf", bi.G_inf);
  row("G1", bi.G1);
  row("L", bi.L);
  row("s", bi.s);
  row("tau", bi.tau);
  row("C_F", bi.C_F);
  row("c", bi.c);
  out << "  K = " << K << ", k0 = " << k0 << "\n";

  const double f_bar = problem->full_value(xbar);
  out << "empirical:\n  F(xbar) = " << f_bar << "\n  ||grad F(x_last)||^2 = "
      << norm_sq(problem->full_grad(tr.final_state.x)) << '\n';
  if (const auto* q = dynamic_cast<const QuadraticProblem*>(problem.get())) {
    out << "  F(xbar) - F* = " << f_bar - q->optimal_value() << '\n';
  }

  out << "bounds:\n";
  auto report = [&](const char* name, std::initializer_list<const char*> needs, auto eval) {
    for (const char* f : needs) {
      if (!est.available(f)) {
        out << "  " << name << ": unavailable (" << f << " not known)\n";
        return;
      }
    }
    try {
      out << "  " << name << " = " << eval() << '\n';
    } catch (const std::invalid_argument& e) {
      out << "  " << name << ": not applicable (" << e.what() << ")\n";
    }
  };
  report("convex, no delay", {"D_inf"}, [&] { return bound_cvx_nodelay(bi, hp.schedule.kind); });
  report("convex, delay tau", {"D_inf", "L"}, [&] {
    if (hp.schedule.kind != ScheduleKind::ConstOverSqrtK) {
      throw std::invalid_argument("needs the alpha/sqrt(K) schedule");
    }
    return bound_cvx_delay(bi);
  });
  report("nonconvex", {"L", "C_F", "c"}, [&] {
    const NcvxBound nb = ncvx_constants(bi, cfg.bounds.setting, est.vtilde_inv_l1);
    out << "  nonconvex: C1 = " << nb.c1 << ", C2 = " << nb.c2 << ", E||vtilde^-1/2||_1 ~ "
        << est.vtilde_inv_l1 << " (n/c = " << est.n_over_c << ")\n";
    return nb.value;
  });
  return 0;
}

}  // namespace apam
