#include <iostream>

#include <CLI11.hpp>

#include "apam/cli.hpp"

namespace {

apam::ExperimentConfig load(const std::string& path) {
  apam::ExperimentConfig cfg = path.empty() ? apam::ExperimentConfig{} : apam::parse_config(path);
  apam::apply_env_overrides(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"apam: asynchronous adaptive optimizer runs, audits and bounds"};
  app.require_subcommand(1);

  std::string config;
  std::string mode;
  std::size_t workers = 0;
  std::string output;
  std::vector<std::size_t> taus;
  std::size_t seeds = 10;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "experiment config file");
    sub->add_option("-o,--output", output, "trace CSV path");
  };
  auto* train = app.add_subcommand("train", "run in the configured mode and write a trace");
  add_common(train);
  train->add_option("--mode", mode, "sim, threads or wire")->check(CLI::IsMember({"sim", "threads", "wire"}));
  train->add_option("--workers", workers, "number of workers")->check(CLI::PositiveNumber);
  auto* simulate = app.add_subcommand("simulate", "fixed-delay sweep, one trace per tau");
  add_common(simulate);
  simulate->add_option("--tau", taus, "comma separated delays")->delimiter(',')->required();
  auto* verify = app.add_subcommand("verify", "invariant audit across seeds");
  add_common(verify);
  verify->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(gradcheck);
  auto* bounds = app.add_subcommand("bounds", "evaluate convergence bounds next to a run");
  add_common(bounds);

  CLI11_PARSE(app, argc, argv);

  try {
    apam::ExperimentConfig cfg = load(config);
    if (!output.empty()) cfg.output = output;
    if (!mode.empty()) cfg.run.mode = apam::parse_run_mode(mode);
    if (workers != 0) cfg.run.workers = workers;
    cfg.validate();
    if (*train) return apam::cmd_train(cfg, std::cout, std::cerr);
    if (*simulate) return apam::cmd_simulate(cfg, taus, std::cout, std::cerr);
    if (*verify) return apam::cmd_verify(cfg, seeds, std::cout, std::cerr);
    if (*gradcheck) return apam::cmd_gradcheck(cfg, std::cout, std::cerr);
    if (*bounds) return apam::cmd_bounds(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "apam: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
