#pragma once

#include <ggfp/densities.hpp>
#include <ggfp/grid.hpp>
#include <ggfp/quadrature.hpp>
#include <ggfp/test_function.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ggfp {

enum class Verdict { Pass, Inconclusive, Violation };
std::string to_string(Verdict v);

/// lhs <= rhs check with a quadrature-derived tolerance budget.
struct InequalityReport {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  /// e.g. "x^(2-delta)" or "x^2"; the weight is constant * label.
  std::string weight_label;
  double weight_constant = 0.0;
  /// lhs / rhs, NaN when rhs is below the floor.
  double ratio = 0.0;
  double margin = 0.0;  ///< rhs - lhs
  double budget = 0.0;  ///< tolerance: 1e-8 max(1, rhs), raised to the quadrature error estimate if larger
  double quadrature_error = 0.0;
  Verdict verdict = Verdict::Pass;
  /// lhs <= rhs + budget.
  bool pass = true;
};

/// Chernoff constant theta^delta / delta^2 (1 in the log-normal limit); free of kappa.
double chernoff_constant(const GenGammaParams& p);
/// Log-Sobolev constant 4 theta^delta / delta^2 (4 in the log-normal limit).
double logsobolev_constant(const GenGammaParams& p);

/// Throws PreconditionError unless kappa >= delta/2.
void require_logsobolev_hypothesis(const GenGammaParams& p);

/// Var[psi(Y)] <= C E[Y^(2-delta) psi'(Y)^2].
InequalityReport chernoff_report(const GenGammaParams& p, const TestFunction& psi);
/// Ent[psi^2(Y)] <= 4C E[Y^(2-delta) psi'(Y)^2]; requires kappa >= delta/2.
InequalityReport logsobolev_report(const GenGammaParams& p, const TestFunction& psi);
/// H(f | f_inf) <= C I_{2-delta}(f | f_inf), equilibrium projected on f's grid.
InequalityReport density_lsi_report(const DensityField& f, const GenGammaParams& p);
/// Same check from precomputed H and I_{2-delta} (e.g. trajectory records).
InequalityReport density_lsi_report(double entropy, double fisher, const GenGammaParams& p);

struct Convexity {
  double rho = 0.0;           ///< inf w'' of the constant-diffusion potential
  double lsi_constant = 0.0;  ///< 1 / (2 rho)
};

/// Potential of the constant-diffusion reduction,
/// w''(x) = 2/theta^delta + (2 kappa/delta - 1)/x^2, bounded below by 2/theta^delta.
Convexity potential_convexity(const GenGammaParams& p);

/// Deterministic family of bounded smooth test functions cycling through
/// tanh(cubic(x/s)), sin(c log(1 + x/s)) and x/(x + c s).
std::vector<TestFunction> generate_test_functions(std::uint64_t seed, std::size_t count, double domain_scale);

/// a x^delta + b (a log x + b in the log-normal limit) with the power saturated
/// smoothly beyond the 1 - 1e-10 quantile; attains equality in the Chernoff bound.
TestFunction sharpness_function(const GenGammaParams& p, double a, double b);

/// Typical scale used for test-function generation (the median).
double natural_scale(const GenGammaParams& p);

/// Reusable evaluation context: one probability rule per parameter set, plus a
/// coarser rule for the quadrature error estimate.
class InequalitySuite {
 public:
  explicit InequalitySuite(const GenGammaParams& p);

  const GenGammaParams& params() const { return params_; }
  InequalityReport chernoff(const TestFunction& psi) const;
  InequalityReport logsobolev(const TestFunction& psi) const;
  /// |ratio - 1| for the sharpness family.
  InequalityReport sharpness(double a, double b) const;

 private:
  GenGammaParams params_;
  ProbabilityRule fine_;
  ProbabilityRule coarse_;
};

}  // namespace ggfp
