#pragma once

#include <ggfp/densities.hpp>
#include <ggfp/grid.hpp>
#include <ggfp/inequalities.hpp>
#include <ggfp/solver.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ggfp {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { Steady, Solve, VerifyPoincare, VerifyLogSobolev, VerifyDecay, VerifyScaling, Classify };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

/// Invalid or unreadable configuration; the message carries "<source>:<line>:".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line) : std::runtime_error(message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct DecayOptions {
  double window_lo = 0.5;
  double window_hi = 2.0;
  /// H(t) <= H(0) exp(-rate t) (1 + slack).
  double slack = 0.05;
  /// Relative error allowed between dH/dt and -I.
  double identity_tolerance = 0.02;
  double ck_tolerance = 1e-10;
};

struct Tolerances {
  double steady_residual = 1e-12;
  double mass = 1e-12;
  double scaling = 5e-3;
  double sharpness = 1e-6;
};

/// Fully resolved run description; every default is filled in before any
/// computation starts.
struct ExperimentConfig {
  Command command = Command::Steady;
  GenGammaParams params;
  std::optional<GenGammaParams> initial;
  GridSpec grid;
  SolverConfig solver;
  std::size_t suite_count = 200;
  std::uint64_t suite_seed = 1;
  std::vector<std::pair<double, double>> sharpness = {{1.0, 0.0}, {2.0, -1.0}, {-0.5, 3.0}};
  std::vector<double> scaling_m = {0.5, 2.0, 3.0};
  double scaling_t = 0.5;
  DecayOptions decay;
  Tolerances tolerances;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cells;
};

/// Parses and validates a JSON config for `command`. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, Command command, const std::string& source_name,
                              const Overrides& overrides = {});

/// One machine-readable check: lhs <= rhs, inconclusive within `budget`.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double budget = 0.0;
  Verdict verdict = Verdict::Pass;
  bool pass = true;
};

Check make_check(std::string name, double lhs, double rhs, double budget = 0.0);
Check make_check(const InequalityReport& r, std::string name);

/// 2 if any check is a violation, else 3 if any is inconclusive, else 0.
int exit_code(const std::vector<Check>& checks);

struct DecayAnalysis {
  double rate = 0.0;
  /// max |dH/dt + I| / I over records inside the window (centered differences).
  double identity_max_rel_error = 0.0;
  std::size_t identity_points = 0;
  /// max over records of H(t) / (H(0) exp(-rate t)).
  double bound_max_ratio = 0.0;
  /// max over records of ||f - f_inf||_1 - 2 sqrt(H).
  double ck_max_excess = 0.0;
  /// max over consecutive records of H_{k+1} - H_k.
  double entropy_max_increase = 0.0;
  /// Record with the most severe density-level LSI verdict (then smallest margin).
  InequalityReport lsi_worst;
  std::size_t lsi_violations = 0;
  std::size_t lsi_inconclusive = 0;
};

/// rate = 1 / chernoff_constant(params); requires kappa >= delta/2.
DecayAnalysis analyze_decay(const Trajectory& traj, const DecayOptions& options);

/// Command-line entry point: `ggfp <subcommand> --config <path> [--out <dir>]
/// [--seed <u64>] [--cells <n>] [--quiet]`. Exit codes: 0 all checks pass,
/// 2 violation, 3 inconclusive, 1 usage or config error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ggfp
