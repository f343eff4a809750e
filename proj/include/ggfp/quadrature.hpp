#pragma once

#include <ggfp/densities.hpp>

#include <functional>
#include <span>
#include <vector>

namespace ggfp {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);
  int order() const { return static_cast<int>(nodes.size()); }

  /// Integral of f over [a, b].
  template <class F>
  double integrate(double a, double b, F&& f) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(mid + half * nodes[k]);
    return half * sum;
  }
};

/// Discrete probability rule sum_j weight_j g(x_j) approximating E[g(X)] for a
/// closed-form density. Nodes cover the support up to tails of `tail` on each
/// side with composite Gauss-Legendre on geometrically growing panels, which
/// resolves power-law behaviour at 0 and the stretched-exponential tail alike.
struct ProbabilityRule {
  std::vector<double> x;
  std::vector<double> weight;

  double total_weight() const;
};

struct ProbabilityRuleOptions {
  double panel_ratio = 1.05;
  int order = 16;
  double tail = 1e-18;
  /// Extend the upper end until x^n f also has tail below `tail` (n <= this).
  int moment_cover = 4;
};

ProbabilityRule build_probability_rule(const GenGammaParams& p, const ProbabilityRuleOptions& options = {});

/// E[g(X)] under the rule. Throws NumericalError on non-finite g at a node
/// carrying positive weight.
double expect(const ProbabilityRule& rule, const std::function<double(double)>& g);

}  // namespace ggfp
