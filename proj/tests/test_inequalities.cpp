#include <ggfp/densities.hpp>
#include <ggfp/errors.hpp>
#include <ggfp/grid.hpp>
#include <ggfp/inequalities.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"

using namespace ggfp;

namespace {

std::vector<GenGammaParams> suite_matrix() {
  return {{1, 2, 1}, {1, 0.4, 1}, {1, 1, 2}, {1, 0.5, 0.5}, {0.5, 2, 1.5}, GenGammaParams::lognormal()};
}

// E[g(Y)] by adaptive quadrature on the closed-form density
double oracle_expect(double theta, double kappa, double delta, const std::function<double(double)>& g) {
  return oracle::integrate_log([&](double x) { return g(x) * oracle::gg_pdf(theta, kappa, delta, x); }, 1e-200,
                               200.0 * theta, 1e-13);
}

}  // namespace

TEST(Constants, ClosedForms) {
  EXPECT_EQ(chernoff_constant({1, 2, 1}), 1.0);
  EXPECT_NEAR(chernoff_constant({2, 0.7, 0.5}), std::sqrt(2.0) / 0.25, 1e-14);
  EXPECT_NEAR(chernoff_constant({2, 5.0, 0.5}), chernoff_constant({2, 0.7, 0.5}), 0.0);
  EXPECT_NEAR(logsobolev_constant({3, 1, 2}), 4.0 * 9.0 / 4.0, 1e-14);
  EXPECT_EQ(chernoff_constant(GenGammaParams::lognormal()), 1.0);
  EXPECT_EQ(logsobolev_constant(GenGammaParams::lognormal()), 4.0);
}

TEST(Chernoff, IdentityIsExtremalForGamma) {
  // Var[Y] = kappa theta^2 equals theta E[Y] for delta = 1
  const TestFunction id([](double x) { return x; }, [](double) { return 1.0; }, "x", 1e3, 1e-3, 1e3);
  const auto r = chernoff_report({1.5, 2.5, 1}, id);
  EXPECT_NEAR(r.lhs, 2.5 * 1.5 * 1.5, 1e-10);
  EXPECT_NEAR(r.rhs, 1.5 * 2.5 * 1.5, 1e-10);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.weight_label, "x^1");
}

TEST(Chernoff, AgreesWithIndependentQuadrature) {
  const TestFunction psi([](double x) { return x / (x + 1.0); }, [](double x) { return 1.0 / ((x + 1) * (x + 1)); },
                         "x/(x+1)", 1.0, 1e-3, 1e3);
  for (const GenGammaParams p : {GenGammaParams{1, 2, 1}, GenGammaParams{1, 1, 2}, GenGammaParams{0.5, 2, 1.5}}) {
    const auto r = chernoff_report(p, psi);
    const double m1 = oracle_expect(p.theta, p.kappa, p.delta, [&](double x) { return psi(x); });
    const double m2 = oracle_expect(p.theta, p.kappa, p.delta, [&](double x) { return psi(x) * psi(x); });
    const double dir = oracle_expect(p.theta, p.kappa, p.delta, [&](double x) {
      return std::pow(x, 2 - p.delta) * psi.derivative(x) * psi.derivative(x);
    });
    EXPECT_NEAR(r.lhs, m2 - m1 * m1, 1e-10) << p.describe();
    EXPECT_NEAR(r.rhs, std::pow(p.theta, p.delta) / (p.delta * p.delta) * dir, 1e-10) << p.describe();
    EXPECT_LE(r.lhs, r.rhs);
  }
}

TEST(Chernoff, SuiteHasNoViolations) {
  for (const auto& p : suite_matrix()) {
    const InequalitySuite suite(p);
    for (const auto& psi : generate_test_functions(5, 60, natural_scale(p))) {
      const auto r = suite.chernoff(psi);
      EXPECT_TRUE(r.pass) << p.describe() << " " << psi.label() << " margin " << r.margin;
      EXPECT_NE(r.verdict, Verdict::Violation);
      EXPECT_GE(r.lhs, 0.0);
    }
  }
}

TEST(Chernoff, SharpnessFamilyAttainsEquality) {
  for (const auto& p : suite_matrix()) {
    const InequalitySuite suite(p);
    for (auto [a, b] : {std::pair{1.0, 0.0}, std::pair{2.0, -1.0}, std::pair{-0.5, 3.0}}) {
      const auto r = suite.sharpness(a, b);
      EXPECT_NEAR(r.ratio, 1.0, 1e-6) << p.describe() << " a=" << a << " b=" << b;
      EXPECT_TRUE(r.pass);
    }
  }
}

TEST(Chernoff, SharpnessClosedFormSides) {
  // psi = x^delta: Var = theta^(2 delta) kappa/delta on both sides
  const GenGammaParams p{0.5, 2, 1.5};
  const auto r = InequalitySuite(p).sharpness(1.0, 0.0);
  const double exact = std::pow(p.theta, 2 * p.delta) * p.kappa / p.delta;
  EXPECT_NEAR(r.lhs / exact, 1.0, 1e-8);
  EXPECT_NEAR(r.rhs / exact, 1.0, 1e-8);
}

TEST(LogSobolev, SuiteHasNoViolations) {
  for (const auto& p : suite_matrix()) {
    if (!p.lognormal_limit && p.kappa < 0.5 * p.delta) continue;
    const InequalitySuite suite(p);
    for (const auto& psi : generate_test_functions(9, 60, natural_scale(p))) {
      const auto r = suite.logsobolev(psi);
      EXPECT_TRUE(r.pass) << p.describe() << " " << psi.label() << " margin " << r.margin;
      EXPECT_GE(r.lhs, 0.0);
    }
  }
}

TEST(LogSobolev, AgreesWithIndependentQuadrature) {
  const GenGammaParams p{1, 2, 1};
  const TestFunction psi([](double x) { return 1.0 + x / (x + 2.0); }, [](double x) { return 2.0 / ((x + 2) * (x + 2)); },
                         "1+x/(x+2)", 2.0, 1e-3, 1e3);
  const auto r = logsobolev_report(p, psi);
  const double m = oracle_expect(1, 2, 1, [&](double x) { return psi(x) * psi(x); });
  const double e = oracle_expect(1, 2, 1, [&](double x) {
    const double u = psi(x) * psi(x);
    return u * std::log(u);
  });
  const double dir = oracle_expect(1, 2, 1, [&](double x) { return x * psi.derivative(x) * psi.derivative(x); });
  EXPECT_NEAR(r.lhs, e - m * std::log(m), 1e-10);
  EXPECT_NEAR(r.rhs, 4.0 * dir, 1e-10);
  EXPECT_TRUE(r.pass);
}

TEST(LogSobolev, PreconditionRejected) {
  const TestFunction psi([](double x) { return std::tanh(x); }, [](double x) { return 1.0 - std::tanh(x) * std::tanh(x); },
                         "tanh", 1.0, 1e-3, 1e2);
  try {
    logsobolev_report({1, 0.4, 1}, psi);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("provided κ ≥ δ/2"), std::string::npos);
  }
  EXPECT_THROW(InequalitySuite({1, 0.4, 1}).logsobolev(psi), PreconditionError);
  EXPECT_THROW(density_lsi_report(1.0, 1.0, {1, 0.2, 1}), PreconditionError);
  EXPECT_NO_THROW(require_logsobolev_hypothesis({1, 0.5, 1}));
  EXPECT_NO_THROW(require_logsobolev_hypothesis(GenGammaParams::lognormal()));
  // the Chernoff bound has no such hypothesis
  EXPECT_TRUE(chernoff_report({1, 0.4, 1}, psi).pass);
}

TEST(DensityLsi, VerdictsFromMargins) {
  const GenGammaParams p{1, 2, 1};
  EXPECT_EQ(density_lsi_report(0.5, 1.0, p).verdict, Verdict::Pass);
  // within the 1e-8 budget of rhs = 1
  const auto near = density_lsi_report(1.0 + 1e-9, 1.0, p);
  EXPECT_EQ(near.verdict, Verdict::Inconclusive);
  EXPECT_TRUE(near.pass);
  const auto bad = density_lsi_report(2.0, 1.0, p);
  EXPECT_EQ(bad.verdict, Verdict::Violation);
  EXPECT_FALSE(bad.pass);
  EXPECT_DOUBLE_EQ(bad.margin, -1.0);
  EXPECT_EQ(to_string(Verdict::Inconclusive), "inconclusive");
}

TEST(DensityLsi, GammaFourAgainstGammaTwo) {
  // H = 2 psi(4) - log 6, I_1 = 4/3, constant 1
  const auto grid = Grid::build(1e-7, 60, 4096, Spacing::Geometric, 6);
  const auto r = density_lsi_report(project(GenGammaParams{1, 4, 1}, grid).field, {1, 2, 1});
  EXPECT_NEAR(r.lhs, 2.0 * oracle::digamma(4) - std::log(6.0), 1e-5);
  EXPECT_NEAR(r.rhs, 4.0 / 3.0, 1e-4);
  EXPECT_TRUE(r.pass);
}

TEST(Convexity, ClosedFormOnRandomTriples) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double theta = 0.2 + 5.0 * u(rng), delta = 0.1 + 1.9 * u(rng), kappa = delta * (0.5 + 3.0 * u(rng));
    const GenGammaParams p{theta, kappa, delta};
    const auto c = potential_convexity(p);
    EXPECT_EQ(c.rho, 2.0 / std::pow(theta, delta));
    EXPECT_EQ(c.lsi_constant, std::pow(theta, delta) / 4.0);
    EXPECT_NEAR(c.lsi_constant, 1.0 / (2.0 * c.rho), 1e-15 * c.lsi_constant);
    // w'' = 2/theta^delta + (2 kappa/delta - 1)/x^2 never drops below rho
    for (double x = 1e-3; x < 1e3; x *= 1.5)
      EXPECT_GE(2.0 / std::pow(theta, delta) + (2.0 * kappa / delta - 1.0) / (x * x), c.rho);
  }
  EXPECT_THROW(potential_convexity({1, 0.2, 1}), PreconditionError);
}

TEST(TestFunctions, DerivativeValidation) {
  EXPECT_THROW(TestFunction([](double x) { return std::sin(x); }, [](double x) { return std::sin(x); }, "bad", 1.0,
                            1e-3, 1e3),
               ParameterError);
  EXPECT_THROW(TestFunction([](double x) { return x; }, [](double) { return 1.0; }, "x", 1.0, 2.0, 1.0),
               ParameterError);
  const TestFunction ok([](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); }, "cos", 1.0, 1e-3,
                        1e3);
  EXPECT_EQ(ok.label(), "cos");
  EXPECT_EQ(ok.bound(), 1.0);
}

TEST(TestFunctions, GeneratorIsDeterministicAndBounded) {
  const auto a = generate_test_functions(17, 30, 2.0), b = generate_test_functions(17, 30, 2.0);
  const auto c = generate_test_functions(18, 30, 2.0);
  ASSERT_EQ(a.size(), 30u);
  int differs = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].label(), b[k].label());
    for (double x : {0.01, 0.7, 3.0, 40.0}) {
      EXPECT_EQ(a[k](x), b[k](x));
      EXPECT_LE(std::fabs(a[k](x)), a[k].bound());
    }
    differs += a[k].label() != c[k].label();
  }
  EXPECT_GT(differs, 25);
  EXPECT_THROW(generate_test_functions(1, 0, 1.0), ParameterError);
}

TEST(TestFunctions, NaturalScaleIsMedian) {
  const GenGammaParams p{1, 1, 1};
  EXPECT_NEAR(natural_scale(p), std::log(2.0), 1e-12);
}
