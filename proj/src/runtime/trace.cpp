#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "master.hpp"

namespace apam {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Sim: return "sim";
    case RunMode::Threads: return "threads";
    case RunMode::Wire: return "wire";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "sim") return RunMode::Sim;
  if (s == "threads") return RunMode::Threads;
  if (s == "wire") return RunMode::Wire;
  throw std::invalid_argument("unknown run mode '" + s + "' (sim|threads|wire)");
}

const char* to_string(TransportKind t) {
  return t == TransportKind::Loopback ? "loopback" : "socket";
}

TransportKind parse_transport(const std::string& s) {
  if (s == "loopback") return TransportKind::Loopback;
  if (s == "socket") return TransportKind::Socket;
  throw std::invalid_argument("unknown transport '" + s + "' (loopback|socket)");
}

namespace {

std::size_t parse_size(const std::string& s, const char* what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument(std::string(what) + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

std::size_t DelayModel::max_delay() const {
  if (kind == DelayKind::PerWorkerFixed) {
    return per_worker.empty() ? 0 : *std::max_element(per_worker.begin(), per_worker.end());
  }
  return tau;
}

std::string DelayModel::describe() const {
  switch (kind) {
    case DelayKind::Fixed: return "fixed:" + std::to_string(tau);
    case DelayKind::UniformInt: return "uniform:" + std::to_string(tau);
    case DelayKind::PerWorkerFixed: {
      std::string s = "per_worker:";
      for (std::size_t i = 0; i < per_worker.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(per_worker[i]);
      }
      return s;
    }
  }
  return "?";
}

DelayModel DelayModel::parse(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("delay model '" + s + "': expected fixed:T, uniform:T or per_worker:a,b,...");
  }
  const std::string kind = s.substr(0, colon);
  const std::string arg = s.substr(colon + 1);
  if (kind == "fixed") return fixed(parse_size(arg, "delay"));
  if (kind == "uniform") return uniform_int(parse_size(arg, "delay"));
  if (kind == "per_worker") {
    std::vector<std::size_t> d;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) d.push_back(parse_size(item, "delay"));
    if (d.empty()) throw std::invalid_argument("delay model: per_worker needs at least one delay");
    return per_worker_fixed(std::move(d));
  }
  throw std::invalid_argument("delay model '" + s + "': unknown kind '" + kind + "'");
}

void RunConfig::validate() const {
  if (workers == 0) throw std::invalid_argument("run: workers must be >= 1");
  if (batch == 0) throw std::invalid_argument("run: batch must be >= 1");
  if (iterations == 0) throw std::invalid_argument("run: iterations must be >= 1");
  if (eval_stride == 0) throw std::invalid_argument("run: eval_stride must be >= 1");
  if (history_capacity == 1) throw std::invalid_argument("run: history_capacity must be >= 2");
  if (mode == RunMode::Sim && delay.kind == DelayKind::PerWorkerFixed &&
      delay.per_worker.size() != workers) {
    throw std::invalid_argument("run: per_worker delay list needs one entry per worker");
  }
}

std::uint64_t RunConfig::delivery_budget() const {
  return max_deliveries != 0 ? max_deliveries : 2 * iterations + policy.tau_max;
}

std::size_t RunTrace::max_tau() const {
  return applied_tau.empty() ? 0 : *std::max_element(applied_tau.begin(), applied_tau.end());
}

double RunTrace::mean_tau() const {
  if (applied_tau.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t t : applied_tau) s += static_cast<double>(t);
  return s / static_cast<double>(applied_tau.size());
}

std::string RunTrace::histogram_line() const {
  std::string s = "staleness_histogram";
  for (std::size_t t = 0; t < tau_histogram.size(); ++t) {
    if (tau_histogram[t] != 0) s += ' ' + std::to_string(t) + ':' + std::to_string(tau_histogram[t]);
  }
  s += " max=" + std::to_string(max_tau()) + " mean=" + detail::format_double(mean_tau());
  return s;
}

RunTrace run(const Problem& problem, const HyperParams& hp, const RunConfig& cfg,
             const RunHooks& hooks) {
  switch (cfg.mode) {
    case RunMode::Sim: return run_sim(problem, hp, cfg, hooks);
    case RunMode::Threads: return run_threads(problem, hp, cfg, hooks);
    case RunMode::Wire: return run_wire(problem, hp, cfg, hooks);
  }
  throw std::invalid_argument("run: unknown mode");
}

static constexpr const char* kTraceHeader = "k,alpha_k,tau_k,dropped,objective,grad_norm_sq,wallclock_ns";

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  using detail::format_double;
  for (const auto& [k, v] : trace.preamble) os << "# " << k << '=' << v << '\n';
  os << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    os << r.k << ',' << format_double(r.alpha_k) << ',' << r.tau << ',' << r.dropped << ','
       << format_double(r.objective) << ',' << format_double(r.grad_norm_sq) << ','
       << r.wallclock_ns << '\n';
  }
  if (trace.mode != RunMode::Sim) os << "# " << trace.histogram_line() << '\n';
}

std::string trace_csv(const RunTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

ParsedTrace parse_trace_csv(std::istream& is) {
  ParsedTrace out;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      const auto sp = body.find(' ');
      if (eq != std::string::npos && (sp == std::string::npos || eq < sp)) {
        out.preamble.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      } else {
        out.preamble.emplace_back(body.substr(0, sp), sp == std::string::npos ? "" : body.substr(sp + 1));
      }
      continue;
    }
    if (!header) {
      if (line != kTraceHeader) {
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": unexpected header");
      }
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string f[7];
    for (int i = 0; i < 7; ++i) {
      if (!std::getline(ss, f[i], ',')) {
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 7 fields");
      }
    }
    TraceRow r;
    r.k = std::stoull(f[0]);
    r.alpha_k = std::stod(f[1]);
    r.tau = std::stoull(f[2]);
    r.dropped = std::stoull(f[3]);
    r.objective = std::stod(f[4]);
    r.grad_norm_sq = std::stod(f[5]);
    r.wallclock_ns = std::stoull(f[6]);
    out.rows.push_back(r);
  }
  if (!header) throw std::runtime_error("trace: missing header");
  return out;
}

StalenessAudit audit_staleness(const RunTrace& trace, std::size_t tau_max) {
  StalenessAudit a;
  a.applied = trace.applied_tau.size();
  for (std::size_t t : trace.applied_tau) {
    a.max_tau = std::max(a.max_tau, t);
    if (t > tau_max) ++a.violations;
  }
  return a;
}

}  // namespace apam
