#pragma once

#include <ggfp/grid.hpp>

#include <vector>

namespace ggfp {

/// Values below this are treated as zero inside logarithms.
inline constexpr double kPositivityFloor = 1e-300;

/// h_i = f_i / g_i. Cells where g is below the floor are marked undefined
/// (value 0, defined[i] = false) rather than dropped.
struct RatioField {
  GridPtr grid;
  std::vector<double> values;
  std::vector<bool> defined;

  std::size_t undefined_count() const;
};

RatioField ratio_field(const DensityField& f, const DensityField& g);

/// H(f|g) = sum w f log(f/g), with 0 log 0 = 0. Round-off negatives down to
/// -1e-12 are reported as 0.
double relative_entropy(const DensityField& f, const DensityField& g);

/// I_beta(f|g) = sum w x^beta f (d/dx log(f/g))^2, derivative by five-point
/// central differences on cell centres (off-centred in the two outer cells).
double weighted_fisher(const DensityField& f, const DensityField& g, double beta);

/// 4 sum w g (d/dx sqrt(f/g))^2, the square-root form of I_0.
double fisher_sqrt_form(const DensityField& f, const DensityField& g);

/// d/dx of nodal values on the cell centres of `grid`.
std::vector<double> center_derivative(const Grid& grid, std::span<const double> values);

struct CsiszarKullback {
  double l1 = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

/// ||f - g||_1 against 2 sqrt(H(f|g)).
CsiszarKullback csiszar_kullback_report(const DensityField& f, const DensityField& g);

}  // namespace ggfp

#include <ggfp/quadrature.hpp>
#include <ggfp/test_function.hpp>

namespace ggfp {

/// Var[psi(X)] with X distributed by the closed-form density of `p`.
double variance_of(const TestFunction& psi, const GenGammaParams& p);
double variance_of(const TestFunction& psi, const ProbabilityRule& rule);

/// Ent[psi^2(X)] = E[psi^2 log psi^2] - E[psi^2] log E[psi^2].
double ent_of(const TestFunction& psi, const GenGammaParams& p);
double ent_of(const TestFunction& psi, const ProbabilityRule& rule);

}  // namespace ggfp
