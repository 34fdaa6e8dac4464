#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "apam/cli.hpp"

using namespace apam;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small run
problem.kind = logistic
problem.samples = 120
problem.features = 6
optimizer.alpha = 0.1
optimizer.schedule = const_over_sqrt_k
run.iterations = 60
run.batch = 8
run.workers = 2
run.delay = uniform:3
run.tau_max = 8
run.eval_stride = 10
)";

std::size_t error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  FAIL("config parsed unexpectedly");
  return 0;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("apam_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("config parses and fills defaults") {
  const ExperimentConfig c = parse_config_text(kSmall);
  CHECK(c.problem.kind == ProblemKind::Logistic);
  CHECK(c.problem.samples == 120);
  CHECK(c.hp.schedule.kind == ScheduleKind::ConstOverSqrtK);
  CHECK(c.hp.schedule.horizon == 60);
  CHECK(c.hp.beta1 == 0.9);
  CHECK(c.run.delay == DelayModel::uniform_int(3));
  CHECK(c.run.policy.tau_max == 8);
  CHECK(c.output == "trace.csv");
}

TEST_CASE("config round trip") {
  ExperimentConfig c = parse_config_text(kSmall);
  c.bounds.L = 2.5;
  c.audit.enabled = true;
  c.run.policy.mode = ReadMode::Inconsistent;
  c.run.delay = DelayModel::per_worker_fixed({1, 4});
  c.problem.box_lower = -3;
  c.problem.box_upper = 3;
  c.hp.beta2 = 0.123456789012345678;
  CHECK(parse_config_text(format_config(c)) == c);
  const fs::path d = scratch("roundtrip");
  write_config(c, (d / "c.cfg").string());
  CHECK(parse_config((d / "c.cfg").string()) == c);
}

TEST_CASE("config errors carry line numbers") {
  CHECK(error_line("problem.kind = logistic\noptimizer.alpha = 0.1\noptimizer.beta1 = 1.5\nrun.iterations = 5\n") == 3);
  CHECK(error_line("problem.kind = logistic\noptimizer.nonsense = 1\n") == 2);
  CHECK(error_line("problem.kind = logistic\nproblem.kind = mlp2\n") == 2);
  CHECK(error_line("problem.kind = logistic\nrun.iterations five\n") == 2);
  CHECK(error_line("problem.kind = logistic\nrun.iterations = -5\n") == 2);
  CHECK(error_line("problem.kind = svm\n") == 1);
  CHECK_THROWS_AS(parse_config_text("problem.kind = logistic\noptimizer.alpha = 0.1\n"), ConfigError);
  CHECK_THROWS(parse_config("/nonexistent/x.cfg"));
}

TEST_CASE("shipped configs parse and validate") {
  for (const auto& entry : fs::directory_iterator(APAM_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    INFO(entry.path().string());
    const ExperimentConfig c = parse_config(entry.path().string());
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("environment seed override") {
  ExperimentConfig c = parse_config_text(kSmall);
  ::setenv("APAM_SEED", "1234", 1);
  apply_env_overrides(c);
  CHECK(c.run.master_seed == 1234);
  ::setenv("APAM_SEED", "abc", 1);
  CHECK_THROWS(apply_env_overrides(c));
  ::unsetenv("APAM_SEED");
  c.run.master_seed = 3;
  apply_env_overrides(c);
  CHECK(c.run.master_seed == 3);
}

TEST_CASE("sweep paths") {
  CHECK(sweep_path("trace.csv", 8) == "trace_tau8.csv");
  CHECK(sweep_path("out/run", 0) == "out/run_tau0.csv");
}

TEST_CASE("train writes a trace") {
  const fs::path d = scratch("train");
  ExperimentConfig c = parse_config_text(kSmall);
  c.output = (d / "t.csv").string();
  c.audit.enabled = true;
  std::ostringstream out, err;
  CHECK(cmd_train(c, out, err) == 0);
  CHECK(fs::exists(c.output));
  CHECK(out.str().find("audit: pass") != std::string::npos);
}

TEST_CASE("simulate writes one trace per tau") {
  const fs::path d = scratch("simulate");
  ExperimentConfig c = parse_config_text(kSmall);
  c.output = (d / "s.csv").string();
  std::ostringstream out, err;
  CHECK(cmd_simulate(c, {0, 2, 4}, out, err) == 0);
  for (const char* f : {"s_tau0.csv", "s_tau2.csv", "s_tau4.csv"}) CHECK(fs::exists(d / f));
}

TEST_CASE("verify passes on a healthy configuration") {
  ExperimentConfig c = parse_config_text(kSmall);
  std::ostringstream out, err;
  CHECK(cmd_verify(c, 3, out, err) == 0);
  CHECK(out.str().find("verify: pass (3/3 seeds)") != std::string::npos);
}

TEST_CASE("gradcheck and bounds commands") {
  ExperimentConfig c = parse_config_text(kSmall);
  std::ostringstream out, err;
  CHECK(cmd_gradcheck(c, out, err) == 0);
  c.problem.kind = ProblemKind::Quadratic;
  c.problem.box_lower = -1;
  c.problem.box_upper = 1;
  c.problem.features = 6;
  c.run.delay = DelayModel::fixed(2);
  std::ostringstream bout, berr;
  CHECK(cmd_bounds(c, bout, berr) == 0);
  CHECK(bout.str().find("F(xbar) - F*") != std::string::npos);
}

TEST_CASE("problem construction from settings") {
  ProblemSpec s;
  s.kind = ProblemKind::Mlp2;
  s.samples = 30;
  s.features = 4;
  s.classes = 3;
  s.hidden = 5;
  auto p = build_problem(s, 1);
  CHECK(p->dimension() == 5 * 4 + 5 + 3 * 5 + 3);
  s.kind = ProblemKind::Logistic;
  s.dataset = std::string(APAM_TEST_DATA) + "/tiny.libsvm";
  CHECK(build_problem(s, 1)->num_samples() == 4);
}
