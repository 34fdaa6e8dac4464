#pragma once

// Experiment configuration files and the subcommands of the `apam` tool.
//
// Config grammar: one `section.key = value` per line, `#` starts a comment,
// blank lines are ignored. Unknown keys, duplicates and malformed values are
// errors that carry the line number.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "apam/optimizer.hpp"
#include "apam/problems.hpp"
#include "apam/runtime.hpp"

namespace apam {

enum class ProblemKind { Logistic, Mlp2, Quadratic };
const char* to_string(ProblemKind k);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Logistic;
  std::string dataset;  // libsvm file; empty means synthetic
  std::size_t samples = 1000;
  std::size_t features = 100;
  std::size_t classes = 2;
  bool separable = false;
  std::uint64_t data_seed = 1;
  double l2 = 1e-4;
  std::size_t hidden = 50;
  double box_lower = -std::numeric_limits<double>::infinity();
  double box_upper = std::numeric_limits<double>::infinity();
  double linear_fraction = 0.5;  // quadratic only
  double noise = 0.3;            // quadratic only

  bool operator==(const ProblemSpec&) const = default;
};

struct AuditSpec {
  bool enabled = false;
  std::size_t stride = 10;
  bool operator==(const AuditSpec&) const = default;
};

struct BoundsSpec {
  std::optional<double> L;
  std::optional<double> C_F;
  std::uint64_t k0 = 0;  // 0 means K/2
  int setting = 1;
  bool operator==(const BoundsSpec&) const = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  HyperParams hp;
  RunConfig run;
  std::string output = "trace.csv";
  AuditSpec audit;
  BoundsSpec bounds;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// problem.kind, optimizer.alpha and run.iterations are required.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
std::string format_config(const ExperimentConfig& cfg);
void write_config(const ExperimentConfig& cfg, const std::string& path);

/// Applies APAM_SEED to run.seed when set.
void apply_env_overrides(ExperimentConfig& cfg);

std::unique_ptr<Problem> build_problem(const ProblemSpec& spec, std::uint64_t init_seed);

/// Each command returns the process exit code.
int cmd_train(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const ExperimentConfig& cfg, const std::vector<std::size_t>& taus, std::ostream& out,
                 std::ostream& err);
int cmd_verify(const ExperimentConfig& cfg, std::size_t seeds, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// "trace.csv", 8 -> "trace_tau8.csv"
std::string sweep_path(const std::string& output, std::size_t tau);

}  // namespace apam
