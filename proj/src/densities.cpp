#include <ggfp/densities.hpp>

#include <ggfp/errors.hpp>
#include <ggfp/special_functions.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace ggfp {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log-normal: log X ~ N(-1, 1)
double lognormal_z(double x) { return std::log(x) + 1.0; }

}  // namespace

void GenGammaParams::validate_formula() const {
  if (lognormal_limit) return;
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("generalized Gamma: theta must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("generalized Gamma: kappa must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("generalized Gamma: delta must be positive");
}

void GenGammaParams::validate() const {
  validate_formula();
  if (!lognormal_limit && delta > 2.0) throw ParameterError("generalized Gamma: delta must lie in (0, 2]");
}

double GenGammaParams::theta_pow_delta() const { return std::pow(theta, delta); }

std::string GenGammaParams::describe() const {
  if (lognormal_limit) return "lognormal";
  // shortest round-trip decimal
  auto shortest = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  return "theta=" + shortest(theta) + ",kappa=" + shortest(kappa) + ",delta=" + shortest(delta);
}

double log_pdf(const GenGammaParams& p, double x) {
  p.validate_formula();
  if (!(x >= 0.0)) throw DomainError("pdf: x must be nonnegative");
  if (p.lognormal_limit) {
    if (x == 0.0) return -INFINITY;
    const double z = lognormal_z(x);
    return -kLogSqrt2Pi - std::log(x) - 0.5 * z * z;
  }
  if (x == 0.0) {
    if (p.kappa < 1.0) throw DomainError("pdf: density diverges at x = 0 when kappa < 1");
    if (p.kappa > 1.0) return -INFINITY;
    // kappa == 1: x^(kappa-1) == 1
    return std::log(p.delta) - std::log(p.theta) - special::log_gamma(p.gamma_shape());
  }
  const double u = std::log(x / p.theta);
  return std::log(p.delta) - p.kappa * std::log(p.theta) - special::log_gamma(p.gamma_shape()) +
         (p.kappa - 1.0) * std::log(x) - std::exp(p.delta * u);
}

double pdf(const GenGammaParams& p, double x) { return std::exp(log_pdf(p, x)); }

double pdf_derivative(const GenGammaParams& p, double x) {
  if (!(x > 0.0)) throw DomainError("pdf_derivative: x must be positive");
  const double f = pdf(p, x);
  if (p.lognormal_limit) return -f * (1.0 + lognormal_z(x)) / x;
  return f * ((p.kappa - 1.0) / x - p.delta * std::pow(x / p.theta, p.delta) / x);
}

double cdf(const GenGammaParams& p, double x) {
  p.validate_formula();
  if (!(x > 0.0)) return 0.0;
  if (p.lognormal_limit) return 0.5 * std::erfc(-lognormal_z(x) / std::numbers::sqrt2);
  return special::gamma_p(p.gamma_shape(), std::pow(x / p.theta, p.delta));
}

double ccdf(const GenGammaParams& p, double x) {
  p.validate_formula();
  if (!(x > 0.0)) return 1.0;
  if (p.lognormal_limit) return 0.5 * std::erfc(lognormal_z(x) / std::numbers::sqrt2);
  return special::gamma_q(p.gamma_shape(), std::pow(x / p.theta, p.delta));
}

namespace {

// Bisection on log x for a monotone predicate; returns the boundary point.
template <class Above>
double bisect_log(double lo, double hi, Above above) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (above(std::exp(mid))) hi = mid;
    else lo = mid;
    if (hi - lo < 1e-15 * std::max(1.0, std::fabs(hi))) break;
  }
  return std::exp(hi);
}

// log-space bracket guaranteed to contain every quantile of practical interest
std::pair<double, double> log_bracket(const GenGammaParams& p) {
  if (p.lognormal_limit) return {-1.0 - 40.0, -1.0 + 40.0};
  // (X/theta)^delta is Gamma(kappa/delta); its quantiles in (1e-300, 1-1e-300)
  // lie well inside [1e-300^(delta/kappa) ... , 800 + 10 * shape]
  const double shape = p.gamma_shape();
  const double log_z_lo = std::max(-700.0, (-690.0 + special::log_gamma(shape + 1.0)) / shape) - 5.0;
  const double log_z_hi = std::log(800.0 + 20.0 * shape);
  const double lt = std::log(p.theta);
  return {std::max(-700.0, lt + log_z_lo / p.delta), std::min(700.0, lt + log_z_hi / p.delta)};
}

}  // namespace

double quantile(const GenGammaParams& p, double u) {
  p.validate_formula();
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
  auto [lo, hi] = log_bracket(p);
  if (u > 0.5) return bisect_log(lo, hi, [&](double x) { return ccdf(p, x) <= 1.0 - u; });
  return bisect_log(lo, hi, [&](double x) { return cdf(p, x) >= u; });
}

double upper_quantile(const GenGammaParams& p, double tail) {
  p.validate_formula();
  if (!(tail > 0.0 && tail < 1.0)) throw DomainError("upper_quantile: tail must lie in (0, 1)");
  auto [lo, hi] = log_bracket(p);
  return bisect_log(lo, hi, [&](double x) { return ccdf(p, x) <= tail; });
}

double moment(const GenGammaParams& p, int n) {
  p.validate_formula();
  if (n < 0) throw ParameterError("moment: order must be nonnegative");
  if (p.lognormal_limit) {
    // log X ~ N(-1, 1)
    return std::exp(-n + 0.5 * n * n);
  }
  if (n == 0) return 1.0;
  const double s = p.gamma_shape();
  return std::exp(n * std::log(p.theta) + special::log_gamma(s + n / p.delta) - special::log_gamma(s));
}

PowerTransform power_transform_params(const GenGammaParams& p, double m) {
  p.validate_formula();
  if (p.lognormal_limit) throw ParameterError("power_transform_params: not defined for the log-normal limit");
  if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("power_transform_params: m must be positive");
  PowerTransform out;
  out.params = {std::pow(p.theta, m), p.kappa / m, p.delta / m, false};
  out.exponent_out_of_range = out.params.delta > 2.0;
  return out;
}

LognormalCurvePoint lognormal_limit_params(double delta, double m) {
  if (!(delta > 0.0) || !(m > 0.0)) throw ParameterError("lognormal_limit_params: delta and m must be positive");
  return {std::pow(delta / m, 2.0 / delta), m * (m / delta + delta / m - 1.0)};
}

}  // namespace ggfp
