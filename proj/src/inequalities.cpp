#include <ggfp/inequalities.hpp>

#include <ggfp/errors.hpp>
#include <ggfp/functionals.hpp>
#include <ggfp/solver.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ggfp {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Violation: return "violation";
  }
  return "violation";
}

TestFunction::TestFunction(Fn value, Fn derivative, std::string label, double bound, double check_lo,
                           double check_hi)
    : value_(std::move(value)), derivative_(std::move(derivative)), label_(std::move(label)), bound_(bound) {
  if (!(check_lo > 0.0) || !(check_hi > check_lo)) throw ParameterError("test function: bad validation interval");
  constexpr int kPoints = 100;
  const double log_lo = std::log(check_lo);
  const double log_span = std::log(check_hi / check_lo);
  for (int k = 0; k < kPoints; ++k) {
    const double x = std::exp(log_lo + log_span * (k + 0.5) / kPoints);
    // relative step, capped where fixed-frequency oscillation would dominate
    const double h = std::min(1e-4 * x, 1e-3);
    const double fd = (8.0 * (value_(x + h) - value_(x - h)) - (value_(x + 2 * h) - value_(x - 2 * h))) / (12.0 * h);
    const double d = derivative_(x);
    const double tol = 1e-6 * std::max(std::fabs(d), std::fabs(fd)) + 1e-9 * std::max(bound_, 1.0) / x;
    if (!std::isfinite(d) || std::fabs(fd - d) > tol)
      throw ParameterError("test function '" + label_ + "': derivative does not match finite differences");
  }
}

double chernoff_constant(const GenGammaParams& p) {
  p.validate();
  if (p.lognormal_limit) return 1.0;
  return p.theta_pow_delta() / (p.delta * p.delta);
}

double logsobolev_constant(const GenGammaParams& p) { return 4.0 * chernoff_constant(p); }

void require_logsobolev_hypothesis(const GenGammaParams& p) {
  p.validate();
  if (p.lognormal_limit) return;
  if (p.kappa < 0.5 * p.delta)
    throw PreconditionError("weighted log-Sobolev inequality holds provided κ ≥ δ/2 (kappa >= delta/2); got " +
                            p.describe());
}

namespace {

std::string weight_label(const GenGammaParams& p) {
  if (p.lognormal_limit) return "x^2";
  std::ostringstream os;
  os.precision(17);
  os << "x^" << 2.0 - p.delta;
  return os.str();
}

double weight_power(const GenGammaParams& p) { return fisher_exponent(p); }

void finish(InequalityReport& r) {
  r.margin = r.rhs - r.lhs;
  r.ratio = r.rhs > 1e-300 ? r.lhs / r.rhs : std::numeric_limits<double>::quiet_NaN();
  r.budget = std::max(1e-8 * std::max(1.0, r.rhs), r.quadrature_error);
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs)) throw NumericalError("inequality: non-finite quadrature");
  if (r.margin >= 0.0) r.verdict = Verdict::Pass;
  else if (r.margin >= -r.budget) r.verdict = Verdict::Inconclusive;
  else r.verdict = Verdict::Violation;
  r.pass = r.lhs <= r.rhs + r.budget;
}

double dirichlet(const ProbabilityRule& rule, const GenGammaParams& p, const TestFunction& psi) {
  const double beta = weight_power(p);
  return expect(rule, [&](double x) {
    const double d = psi.derivative(x);
    return std::pow(x, beta) * d * d;
  });
}

struct SidePair {
  double lhs;
  double rhs;
};

ProbabilityRuleOptions fine_options() { return {1.05, 16, 1e-18}; }
ProbabilityRuleOptions coarse_options() { return {1.05 * 1.05, 16, 1e-18}; }

}  // namespace

InequalitySuite::InequalitySuite(const GenGammaParams& p)
    : params_(p), fine_(build_probability_rule(p, fine_options())), coarse_(build_probability_rule(p, coarse_options())) {
  params_.validate();
}

InequalityReport InequalitySuite::chernoff(const TestFunction& psi) const {
  const double c = chernoff_constant(params_);
  auto sides = [&](const ProbabilityRule& rule) {
    return SidePair{variance_of(psi, rule), c * dirichlet(rule, params_, psi)};
  };
  const auto fine = sides(fine_);
  const auto coarse = sides(coarse_);
  InequalityReport r;
  r.label = psi.label();
  r.lhs = fine.lhs;
  r.rhs = fine.rhs;
  r.weight_label = weight_label(params_);
  r.weight_constant = c;
  r.quadrature_error = std::fabs(fine.lhs - coarse.lhs) + std::fabs(fine.rhs - coarse.rhs);
  finish(r);
  return r;
}

InequalityReport InequalitySuite::logsobolev(const TestFunction& psi) const {
  require_logsobolev_hypothesis(params_);
  const double c = logsobolev_constant(params_);
  auto sides = [&](const ProbabilityRule& rule) { return SidePair{ent_of(psi, rule), c * dirichlet(rule, params_, psi)}; };
  const auto fine = sides(fine_);
  const auto coarse = sides(coarse_);
  InequalityReport r;
  r.label = psi.label();
  r.lhs = fine.lhs;
  r.rhs = fine.rhs;
  r.weight_label = weight_label(params_);
  r.weight_constant = c;
  r.quadrature_error = std::fabs(fine.lhs - coarse.lhs) + std::fabs(fine.rhs - coarse.rhs);
  finish(r);
  return r;
}

InequalityReport InequalitySuite::sharpness(double a, double b) const {
  const auto psi = sharpness_function(params_, a, b);
  auto r = chernoff(psi);
  // equality check: |ratio - 1| <= 1e-6
  r.pass = std::isfinite(r.ratio) && std::fabs(r.ratio - 1.0) <= 1e-6;
  r.verdict = r.pass ? Verdict::Pass : Verdict::Violation;
  return r;
}

InequalityReport chernoff_report(const GenGammaParams& p, const TestFunction& psi) {
  return InequalitySuite(p).chernoff(psi);
}

InequalityReport logsobolev_report(const GenGammaParams& p, const TestFunction& psi) {
  require_logsobolev_hypothesis(p);
  return InequalitySuite(p).logsobolev(psi);
}

InequalityReport density_lsi_report(const DensityField& f, const GenGammaParams& p) {
  require_logsobolev_hypothesis(p);
  const auto eq = equilibrium_field(p, f.grid_ptr());
  InequalityReport r;
  r.label = "density-lsi";
  r.lhs = relative_entropy(f, eq);
  r.weight_constant = chernoff_constant(p);
  r.rhs = r.weight_constant * weighted_fisher(f, eq, fisher_exponent(p));
  r.weight_label = weight_label(p);
  finish(r);
  return r;
}

InequalityReport density_lsi_report(double entropy, double fisher, const GenGammaParams& p) {
  require_logsobolev_hypothesis(p);
  InequalityReport r;
  r.label = "density-lsi";
  r.lhs = entropy;
  r.weight_constant = chernoff_constant(p);
  r.rhs = r.weight_constant * fisher;
  r.weight_label = weight_label(p);
  finish(r);
  return r;
}

Convexity potential_convexity(const GenGammaParams& p) {
  p.validate();
  if (p.lognormal_limit) throw ParameterError("potential_convexity: not defined in the log-normal limit");
  if (p.kappa < 0.5 * p.delta)
    throw PreconditionError("potential is not uniformly convex: requires kappa >= delta/2, got " + p.describe());
  Convexity c;
  c.rho = 2.0 / p.theta_pow_delta();
  // closed form of 1 / (2 rho), so that no extra rounding enters
  c.lsi_constant = p.theta_pow_delta() / 4.0;
  return c;
}

namespace {

// uniform double in [0, 1) from the top 53 bits; platform independent
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::vector<TestFunction> generate_test_functions(std::uint64_t seed, std::size_t count, double domain_scale) {
  if (count < 1) throw ParameterError("generate_test_functions: count must be at least 1");
  if (!(domain_scale > 0.0)) throw ParameterError("generate_test_functions: scale must be positive");
  std::mt19937_64 rng(seed);
  const double s = domain_scale;
  const double lo = 1e-3 * s;
  const double hi = 1e3 * s;
  std::vector<TestFunction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::string tag = "#" + std::to_string(k) + " ";
    switch (k % 3) {
      case 0: {
        const double c0 = uniform(rng, -2, 2), c1 = uniform(rng, -2, 2), c2 = uniform(rng, -2, 2),
                     c3 = uniform(rng, -2, 2);
        auto poly = [=](double t) { return c0 + t * (c1 + t * (c2 + t * c3)); };
        auto dpoly = [=](double t) { return c1 + t * (2.0 * c2 + t * 3.0 * c3); };
        out.emplace_back([=](double x) { return std::tanh(poly(x / s)); },
                         [=](double x) {
                           const double th = std::tanh(poly(x / s));
                           return (1.0 - th * th) * dpoly(x / s) / s;
                         },
                         tag + "tanh(" + fmt(c0) + "+" + fmt(c1) + "t+" + fmt(c2) + "t^2+" + fmt(c3) + "t^3)", 1.0, lo,
                         hi);
        break;
      }
      case 1: {
        const double c = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.5, 4.0);
        out.emplace_back([=](double x) { return std::sin(c * std::log1p(x / s)); },
                         [=](double x) { return c * std::cos(c * std::log1p(x / s)) / (s + x); },
                         tag + "sin(" + fmt(c) + "log(1+t))", 1.0, lo, hi);
        break;
      }
      default: {
        const double c = s * std::pow(10.0, uniform(rng, -1.0, 1.0));
        out.emplace_back([=](double x) { return x / (x + c); },
                         [=](double x) { return c / ((x + c) * (x + c)); },
                         tag + "x/(x+" + fmt(c) + ")", 1.0, lo, hi);
        break;
      }
    }
  }
  return out;
}

double natural_scale(const GenGammaParams& p) { return quantile(p, 0.5); }

TestFunction sharpness_function(const GenGammaParams& p, double a, double b) {
  p.validate();
  const double x_hi = upper_quantile(p, 1e-10);
  const double x_lo = quantile(p, 1e-10);
  const std::string label = "sharp a=" + fmt(a) + " b=" + fmt(b) + " (clipped beyond 1-1e-10 quantile)";
  const double bound_gap = std::fabs(b);
  if (p.lognormal_limit) {
    // a log x + b, saturated on both sides
    const double u_hi = std::log(x_hi), u_lo = std::log(x_lo);
    const double len = 1.0;
    auto clip = [=](double u) {
      if (u > u_hi) return u_hi + len * std::tanh((u - u_hi) / len);
      if (u < u_lo) return u_lo + len * std::tanh((u - u_lo) / len);
      return u;
    };
    auto dclip = [=](double u) {
      if (u > u_hi) return 1.0 - std::pow(std::tanh((u - u_hi) / len), 2);
      if (u < u_lo) return 1.0 - std::pow(std::tanh((u - u_lo) / len), 2);
      return 1.0;
    };
    const double bound = std::fabs(a) * (std::max(std::fabs(u_hi), std::fabs(u_lo)) + len) + bound_gap;
    return TestFunction([=](double x) { return a * clip(std::log(x)) + b; },
                        [=](double x) { return a * dclip(std::log(x)) / x; }, label, bound, x_lo, x_hi);
  }
  const double delta = p.delta;
  const double u_c = std::pow(x_hi, delta);
  const double len = u_c;
  auto clip = [=](double u) { return u > u_c ? u_c + len * std::tanh((u - u_c) / len) : u; };
  auto dclip = [=](double u) { return u > u_c ? 1.0 - std::pow(std::tanh((u - u_c) / len), 2) : 1.0; };
  const double bound = std::fabs(a) * (u_c + len) + bound_gap;
  return TestFunction([=](double x) { return a * clip(std::pow(x, delta)) + b; },
                      [=](double x) { return a * dclip(std::pow(x, delta)) * delta * std::pow(x, delta - 1.0); },
                      label, bound, x_lo, x_hi);
}

}  // namespace ggfp
