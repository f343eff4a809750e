#include <ggfp/quadrature.hpp>

#include <ggfp/errors.hpp>

#include <cmath>
#include <numbers>

namespace ggfp {

GaussLegendre::GaussLegendre(int order) {
  if (order < 1 || order > 128) throw ParameterError("GaussLegendre: order must lie in [1, 128]");
  const int n = order;
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    // final derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

double ProbabilityRule::total_weight() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

ProbabilityRule build_probability_rule(const GenGammaParams& p, const ProbabilityRuleOptions& options) {
  p.validate_formula();
  if (!(options.panel_ratio > 1.0)) throw ParameterError("probability rule: panel ratio must exceed 1");
  const double lo = quantile(p, options.tail);
  double hi = upper_quantile(p, options.tail);
  if (options.moment_cover > 0) {
    // the x^n-tilted law is (theta, kappa + n, delta); in the log-normal limit
    // it is the same law shifted by n in log x
    const int n = options.moment_cover;
    if (p.lognormal_limit) {
      hi *= std::exp(static_cast<double>(n));
    } else {
      GenGammaParams tilted = p;
      tilted.kappa += n;
      hi = std::max(hi, upper_quantile(tilted, options.tail));
    }
  }
  const GaussLegendre gl(options.order);
  const double log_ratio = std::log(options.panel_ratio);
  const auto panels = static_cast<std::size_t>(std::ceil(std::log(hi / lo) / log_ratio));
  const double step = std::log(hi / lo) / static_cast<double>(panels);

  ProbabilityRule rule;
  rule.x.reserve(panels * gl.nodes.size());
  rule.weight.reserve(panels * gl.nodes.size());
  const double log_lo = std::log(lo);
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = std::exp(log_lo + step * static_cast<double>(k));
    const double b = std::exp(log_lo + step * static_cast<double>(k + 1));
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double x = mid + half * gl.nodes[q];
      const double w = half * gl.weights[q] * pdf(p, x);
      if (w > 0.0) {
        rule.x.push_back(x);
        rule.weight.push_back(w);
      }
    }
  }
  return rule;
}

double expect(const ProbabilityRule& rule, const std::function<double(double)>& g) {
  double sum = 0.0;
  for (std::size_t j = 0; j < rule.x.size(); ++j) {
    const double v = g(rule.x[j]);
    if (!std::isfinite(v)) throw NumericalError("expectation: integrand is not finite at a quadrature node");
    sum += rule.weight[j] * v;
  }
  return sum;
}

}  // namespace ggfp
