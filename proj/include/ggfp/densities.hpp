#pragma once

#include <string>

namespace ggfp {

/// One member of the generalized Gamma family
///   f(x) = delta / theta^kappa * x^(kappa-1) * exp(-(x/theta)^delta) / Gamma(kappa/delta),
/// or, when `lognormal_limit` is set, the fixed Log-normal density
///   f(x) = exp(-(log x + 1)^2 / 2) / (sqrt(2 pi) x)
/// reached as delta -> 0 along the unit-exponent parameter curve.
struct GenGammaParams {
  double theta = 1.0;  ///< scale
  double kappa = 1.0;  ///< shape
  double delta = 1.0;  ///< exponent, in (0, 2]
  bool lognormal_limit = false;

  static GenGammaParams lognormal() { return {1.0, 1.0, 1.0, true}; }

  /// Throws ParameterError unless theta > 0, kappa > 0 and 0 < delta <= 2.
  void validate() const;
  /// Same checks without the delta <= 2 ceiling (the density formula itself
  /// stays valid for any positive exponent).
  void validate_formula() const;

  /// kappa / delta, the shape of the Gamma variable (X/theta)^delta.
  double gamma_shape() const { return kappa / delta; }
  /// theta^delta.
  double theta_pow_delta() const;

  std::string describe() const;

  bool operator==(const GenGammaParams&) const = default;
};

double log_pdf(const GenGammaParams& p, double x);
double pdf(const GenGammaParams& p, double x);
/// d/dx f(x), closed form.
double pdf_derivative(const GenGammaParams& p, double x);

double cdf(const GenGammaParams& p, double x);
/// 1 - cdf(x), computed without cancellation.
double ccdf(const GenGammaParams& p, double x);
/// Inverse cdf by bisection in log x; u in (0, 1).
double quantile(const GenGammaParams& p, double u);
/// Smallest x with ccdf(x) <= tail, i.e. the upper quantile at 1 - tail.
double upper_quantile(const GenGammaParams& p, double tail);

/// E[X^n] = theta^n Gamma((kappa+n)/delta) / Gamma(kappa/delta).
double moment(const GenGammaParams& p, int n);

struct PowerTransform {
  GenGammaParams params;
  /// delta/m left the supported exponent range (0, 2]; the density is still valid.
  bool exponent_out_of_range = false;
};

/// Law of X^m when X ~ (theta, kappa, delta): (theta^m, kappa/m, delta/m).
PowerTransform power_transform_params(const GenGammaParams& p, double m);

struct LognormalCurvePoint {
  double theta;
  double kappa;
};

/// Parameter curve theta = (delta/m)^(2/delta), kappa = m (m/delta + delta/m - 1)
/// whose delta -> 0 limit at m = 1 is the Log-normal density.
LognormalCurvePoint lognormal_limit_params(double delta, double m);

}  // namespace ggfp
