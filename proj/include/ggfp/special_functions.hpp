#pragma once

namespace ggfp::special {

/// log Γ(x) for x > 0 (Lanczos, g = 7, nine terms; reflection below 1/2).
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// directly so that small tails keep full relative precision.
double gamma_q(double a, double x);

/// Bernoulli function B(z) = z / (e^z - 1), B(0) = 1.
double bernoulli(double z);

}  // namespace ggfp::special
