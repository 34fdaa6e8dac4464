#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "apam/cli.hpp"

namespace apam {

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Logistic: return "logistic";
    case ProblemKind::Mlp2: return "mlp2";
    case ProblemKind::Quadratic: return "quadratic";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double to_double(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

double beta(const std::string& v) {
  const double b = to_double(v);
  if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("must lie in [0, 1), got " + v);
  return b;
}

double positive(const std::string& v) {
  const double x = to_double(v);
  if (!(x > 0.0)) throw std::invalid_argument("must be > 0, got " + v);
  return x;
}

ProblemKind to_kind(const std::string& v) {
  if (v == "logistic") return ProblemKind::Logistic;
  if (v == "mlp2") return ProblemKind::Mlp2;
  if (v == "quadratic") return ProblemKind::Quadratic;
  throw std::invalid_argument("unknown problem kind '" + v + "' (logistic|mlp2|quadratic)");
}

const char* schedule_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::ConstOverSqrtK: return "const_over_sqrt_k";
    case ScheduleKind::InvSqrtK: return "inv_sqrt_k";
    case ScheduleKind::Constant: return "constant";
  }
  return "?";
}

ScheduleKind to_schedule(const std::string& v) {
  if (v == "const_over_sqrt_k") return ScheduleKind::ConstOverSqrtK;
  if (v == "inv_sqrt_k") return ScheduleKind::InvSqrtK;
  if (v == "constant") return ScheduleKind::Constant;
  throw std::invalid_argument("unknown schedule '" + v + "' (const_over_sqrt_k|inv_sqrt_k|constant)");
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

// Ordered as written by format_config.
const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  using S = std::string;
  using O = std::optional<std::string>;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"problem.kind", {[](C& c, const S& v) { c.problem.kind = to_kind(v); },
                        [](const C& c) -> O { return to_string(c.problem.kind); }}},
      {"problem.dataset", {[](C& c, const S& v) { c.problem.dataset = v; },
                           [](const C& c) -> O {
                             if (c.problem.dataset.empty()) return std::nullopt;
                             return c.problem.dataset;
                           }}},
      {"problem.samples", {[](C& c, const S& v) { c.problem.samples = to_u64(v); },
                           [](const C& c) -> O { return std::to_string(c.problem.samples); }}},
      {"problem.features", {[](C& c, const S& v) { c.problem.features = to_u64(v); },
                            [](const C& c) -> O { return std::to_string(c.problem.features); }}},
      {"problem.classes", {[](C& c, const S& v) { c.problem.classes = to_u64(v); },
                           [](const C& c) -> O { return std::to_string(c.problem.classes); }}},
      {"problem.separable", {[](C& c, const S& v) { c.problem.separable = to_bool(v); },
                             [](const C& c) -> O { return c.problem.separable ? "true" : "false"; }}},
      {"problem.data_seed", {[](C& c, const S& v) { c.problem.data_seed = to_u64(v); },
                             [](const C& c) -> O { return std::to_string(c.problem.data_seed); }}},
      {"problem.l2", {[](C& c, const S& v) { c.problem.l2 = to_double(v); },
                      [](const C& c) -> O { return fmt(c.problem.l2); }}},
      {"problem.hidden", {[](C& c, const S& v) { c.problem.hidden = to_u64(v); },
                          [](const C& c) -> O { return std::to_string(c.problem.hidden); }}},
      {"problem.box_lower", {[](C& c, const S& v) { c.problem.box_lower = to_double(v); },
                             [](const C& c) -> O { return fmt(c.problem.box_lower); }}},
      {"problem.box_upper", {[](C& c, const S& v) { c.problem.box_upper = to_double(v); },
                             [](const C& c) -> O { return fmt(c.problem.box_upper); }}},
      {"problem.linear_fraction", {[](C& c, const S& v) { c.problem.linear_fraction = to_double(v); },
                                   [](const C& c) -> O { return fmt(c.problem.linear_fraction); }}},
      {"problem.noise", {[](C& c, const S& v) { c.problem.noise = to_double(v); },
                         [](const C& c) -> O { return fmt(c.problem.noise); }}},

      {"optimizer.beta1", {[](C& c, const S& v) { c.hp.beta1 = beta(v); },
                           [](const C& c) -> O { return fmt(c.hp.beta1); }}},
      {"optimizer.beta2", {[](C& c, const S& v) { c.hp.beta2 = beta(v); },
                           [](const C& c) -> O { return fmt(c.hp.beta2); }}},
      {"optimizer.alpha", {[](C& c, const S& v) { c.hp.schedule.alpha = positive(v); },
                           [](const C& c) -> O { return fmt(c.hp.schedule.alpha); }}},
      {"optimizer.schedule", {[](C& c, const S& v) { c.hp.schedule.kind = to_schedule(v); },
                              [](const C& c) -> O { return schedule_name(c.hp.schedule.kind); }}},
      {"optimizer.eps", {[](C& c, const S& v) { c.hp.eps = to_double(v); },
                         [](const C& c) -> O { return fmt(c.hp.eps); }}},

      {"run.mode", {[](C& c, const S& v) { c.run.mode = parse_run_mode(v); },
                    [](const C& c) -> O { return to_string(c.run.mode); }}},
      {"run.workers", {[](C& c, const S& v) { c.run.workers = to_u64(v); },
                       [](const C& c) -> O { return std::to_string(c.run.workers); }}},
      {"run.batch", {[](C& c, const S& v) { c.run.batch = to_u64(v); },
                     [](const C& c) -> O { return std::to_string(c.run.batch); }}},
      {"run.iterations", {[](C& c, const S& v) { c.run.iterations = to_u64(v); },
                          [](const C& c) -> O { return std::to_string(c.run.iterations); }}},
      {"run.tau_max", {[](C& c, const S& v) { c.run.policy.tau_max = to_u64(v); },
                       [](const C& c) -> O { return std::to_string(c.run.policy.tau_max); }}},
      {"run.read_mode", {[](C& c, const S& v) {
                           if (v == "consistent") c.run.policy.mode = ReadMode::Consistent;
                           else if (v == "inconsistent") c.run.policy.mode = ReadMode::Inconsistent;
                           else throw std::invalid_argument("expected consistent or inconsistent, got '" + v + "'");
                         },
                         [](const C& c) -> O {
                           return c.run.policy.mode == ReadMode::Consistent ? "consistent" : "inconsistent";
                         }}},
      {"run.delay", {[](C& c, const S& v) { c.run.delay = DelayModel::parse(v); },
                     [](const C& c) -> O { return c.run.delay.describe(); }}},
      {"run.seed", {[](C& c, const S& v) { c.run.master_seed = to_u64(v); },
                    [](const C& c) -> O { return std::to_string(c.run.master_seed); }}},
      {"run.max_deliveries", {[](C& c, const S& v) { c.run.max_deliveries = to_u64(v); },
                              [](const C& c) -> O { return std::to_string(c.run.max_deliveries); }}},
      {"run.queue_capacity", {[](C& c, const S& v) { c.run.queue_capacity = to_u64(v); },
                              [](const C& c) -> O { return std::to_string(c.run.queue_capacity); }}},
      {"run.transport", {[](C& c, const S& v) { c.run.transport = parse_transport(v); },
                         [](const C& c) -> O { return to_string(c.run.transport); }}},
      {"run.wire_latency", {[](C& c, const S& v) { c.run.wire_latency = to_u64(v); },
                            [](const C& c) -> O { return std::to_string(c.run.wire_latency); }}},
      {"run.eval_stride", {[](C& c, const S& v) { c.run.eval_stride = to_u64(v); },
                           [](const C& c) -> O { return std::to_string(c.run.eval_stride); }}},

      {"output.trace", {[](C& c, const S& v) { c.output = v; },
                        [](const C& c) -> O { return c.output; }}},

      {"audit.enabled", {[](C& c, const S& v) { c.audit.enabled = to_bool(v); },
                         [](const C& c) -> O { return c.audit.enabled ? "true" : "false"; }}},
      {"audit.stride", {[](C& c, const S& v) { c.audit.stride = to_u64(v); },
                        [](const C& c) -> O { return std::to_string(c.audit.stride); }}},

      {"bounds.L", {[](C& c, const S& v) { c.bounds.L = to_double(v); },
                    [](const C& c) -> O {
                      if (!c.bounds.L) return std::nullopt;
                      return fmt(*c.bounds.L);
                    }}},
      {"bounds.C_F", {[](C& c, const S& v) { c.bounds.C_F = to_double(v); },
                      [](const C& c) -> O {
                        if (!c.bounds.C_F) return std::nullopt;
                        return fmt(*c.bounds.C_F);
                      }}},
      {"bounds.k0", {[](C& c, const S& v) { c.bounds.k0 = to_u64(v); },
                     [](const C& c) -> O { return std::to_string(c.bounds.k0); }}},
      {"bounds.setting", {[](C& c, const S& v) {
                            const auto s = to_u64(v);
                            if (s != 1 && s != 2) throw std::invalid_argument("must be 1 or 2");
                            c.bounds.setting = static_cast<int>(s);
                          },
                          [](const C& c) -> O { return std::to_string(c.bounds.setting); }}},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return &f;
  }
  return nullptr;
}

}  // namespace

void ExperimentConfig::validate() const {
  hp.validate();
  run.validate();
  if (problem.samples == 0) throw std::invalid_argument("problem.samples must be >= 1");
  if (problem.features == 0) throw std::invalid_argument("problem.features must be >= 1");
  if (problem.classes < 2) throw std::invalid_argument("problem.classes must be >= 2");
  if (problem.hidden == 0) throw std::invalid_argument("problem.hidden must be >= 1");
  if (!(problem.l2 >= 0.0)) throw std::invalid_argument("problem.l2 must be >= 0");
  if (!(problem.box_lower <= problem.box_upper)) {
    throw std::invalid_argument("problem.box_lower must be <= problem.box_upper");
  }
  if (audit.stride == 0) throw std::invalid_argument("audit.stride must be >= 1");
  if (bounds.k0 > run.iterations) throw std::invalid_argument("bounds.k0 must be <= run.iterations");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'section.key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* f = find_field(key);
    if (f == nullptr) throw ConfigError("unknown key '" + key + "'", lineno);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", lineno);
    try {
      f->set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what(), lineno);
    }
  }
  for (const char* req : {"problem.kind", "optimizer.alpha", "run.iterations"}) {
    if (!seen.count(req)) throw ConfigError(std::string("missing required key '") + req + "'", 0);
  }
  cfg.hp.schedule.horizon = cfg.run.iterations;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), 0);
  }
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [key, f] : fields()) {
    const auto value = f.get(cfg);
    if (!value) continue;
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += '\n';
      section = sec;
    }
    out += key + " = " + *value + '\n';
  }
  return out;
}

void write_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
  out << format_config(cfg);
}

void apply_env_overrides(ExperimentConfig& cfg) {
  const char* s = std::getenv("APAM_SEED");
  if (s == nullptr || *s == '\0') return;
  try {
    cfg.run.master_seed = to_u64(s);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("APAM_SEED: ") + e.what(), 0);
  }
}

}  // namespace apam
