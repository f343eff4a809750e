#include <ggfp/densities.hpp>
#include <ggfp/errors.hpp>
#include <ggfp/functionals.hpp>
#include <ggfp/grid.hpp>
#include <ggfp/test_function.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"

using namespace ggfp;

namespace {

GridPtr wide_grid(std::size_t cells, Spacing s = Spacing::Geometric) { return Grid::build(1e-7, 60, cells, s, 6); }

DensityField projected(const GenGammaParams& p, const GridPtr& g) { return project(p, g).field; }

// KL(Gamma(a, 1) | Gamma(b, 1)) = (a - b) psi(a) - log Gamma(a) + log Gamma(b)
double gamma_kl(double a, double b) { return (a - b) * oracle::digamma(a) - std::lgamma(a) + std::lgamma(b); }

TestFunction constant_fn(double c) {
  return TestFunction([c](double) { return c; }, [](double) { return 0.0; }, "const", std::fabs(c), 1e-3, 1e3);
}

TestFunction identity_fn() {
  return TestFunction([](double x) { return x; }, [](double) { return 1.0; }, "x", 1e3, 1e-3, 1e3);
}

}  // namespace

TEST(RelativeEntropy, SelfIsZero) {
  const auto g = wide_grid(512);
  const auto f = projected({1, 2, 1}, g);
  EXPECT_EQ(relative_entropy(f, f), 0.0);
}

TEST(RelativeEntropy, GammaPairAgainstDigammaAndQuadrature) {
  const double analytic = gamma_kl(2, 1);
  EXPECT_NEAR(analytic, 1.0 - oracle::kEulerGamma, 1e-14);
  const double quad = oracle::integrate_log(
      [](double x) {
        const double f = oracle::gg_pdf(1, 2, 1, x), g = oracle::gg_pdf(1, 1, 1, x);
        return f > 0 ? f * std::log(f / g) : 0.0;
      },
      1e-300, 80.0);
  EXPECT_NEAR(quad, analytic, 1e-10);
  const auto g = wide_grid(16384);
  EXPECT_NEAR(relative_entropy(projected({1, 2, 1}, g), projected({1, 1, 1}, g)), analytic, 1e-6);
}

TEST(RelativeEntropy, ExponentialsOfDifferentScale) {
  const auto g = Grid::build(1e-7, 120, 4096, Spacing::Geometric, 6);
  const double h = relative_entropy(projected({1, 1, 1}, g), projected({2, 1, 1}, g));
  EXPECT_NEAR(h, std::log(2.0) - 0.5, 1e-6);
}

TEST(RelativeEntropy, GammaFourAgainstGammaTwo) {
  const double analytic = 2.0 * oracle::digamma(4) - std::log(6.0);
  EXPECT_NEAR(analytic, gamma_kl(4, 2), 1e-14);
  const auto g = wide_grid(16384);
  EXPECT_NEAR(relative_entropy(projected({1, 4, 1}, g), projected({1, 2, 1}, g)), analytic, 1e-6);
}

TEST(RelativeEntropy, NonnegativeOnRandomPerturbations) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto grid = wide_grid(256);
  const auto ref = projected({1, 1.5, 0.8}, grid).normalized();
  for (int trial = 0; trial < 50; ++trial) {
    const double a = 0.5 * u(rng), k = 3.0 * std::fabs(u(rng)) + 0.2, ph = 3.0 * u(rng);
    std::vector<double> v(ref.values().begin(), ref.values().end());
    const auto c = grid->centers();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= 1.0 + a * std::sin(k * std::log(c[i]) + ph);
    const DensityField f = DensityField(grid, v).normalized();
    EXPECT_GE(relative_entropy(f, ref), 0.0);
    EXPECT_GE(relative_entropy(ref, f), 0.0);
  }
}

TEST(RelativeEntropy, StableUnderRefinement) {
  // successive differences shrink at the second-order projection rate
  auto h = [](std::size_t n) { return relative_entropy(projected({1, 3, 1.5}, wide_grid(n)), projected({1, 2, 1.5}, wide_grid(n))); };
  const double h1 = h(1024), h2 = h(2048), h3 = h(4096);
  EXPECT_NEAR(h1, h3, 1e-4 * h3);
  const double rate = std::fabs(h1 - h2) / std::fabs(h2 - h3);
  EXPECT_GT(rate, 3.5);
  EXPECT_LT(rate, 4.5);
}

TEST(RelativeEntropy, SupportViolation) {
  const auto grid = Grid::build(0.1, 5, 32, Spacing::Uniform, 4);
  const auto f = projected({1, 2, 1}, grid);
  std::vector<double> v(f.values().begin(), f.values().end());
  v[5] = 0.0;
  const DensityField g(grid, v);
  EXPECT_THROW(relative_entropy(f, g), DomainError);
  EXPECT_THROW(weighted_fisher(f, g, 1.0), DomainError);
  EXPECT_NO_THROW(relative_entropy(g, f));
  const auto r = ratio_field(f, g);
  EXPECT_EQ(r.undefined_count(), 1u);
  EXPECT_FALSE(r.defined[5]);
}

TEST(Fisher, GammaFourAgainstGammaTwo) {
  // d/dx log(f/g) = 2/x; I_1 = 4 E[1/X] = 4/3, I_0 = 4 E[1/X^2] = 2/3
  const auto g = wide_grid(2048);
  const auto f = projected({1, 4, 1}, g), e = projected({1, 2, 1}, g);
  EXPECT_NEAR(weighted_fisher(f, e, 1.0), 4.0 / 3.0, 1e-4);
  EXPECT_NEAR(weighted_fisher(f, e, 0.0), 2.0 / 3.0, 1e-4);
  EXPECT_EQ(weighted_fisher(f, f, 1.0), 0.0);
  EXPECT_THROW(weighted_fisher(f, e, -1.0), ParameterError);
}

TEST(Fisher, SelfConvergence) {
  for (double beta : {0.0, 1.0, 1.5}) {
    const double a = weighted_fisher(projected({1, 3, 1.5}, wide_grid(1024)), projected({1, 2, 1.5}, wide_grid(1024)), beta);
    const double b = weighted_fisher(projected({1, 3, 1.5}, wide_grid(2048)), projected({1, 2, 1.5}, wide_grid(2048)), beta);
    EXPECT_NEAR(a, b, 5e-3 * b) << "beta=" << beta;
  }
}

TEST(Fisher, SquareRootFormAgrees) {
  std::vector<double> gaps;
  for (std::size_t n : {512, 1024, 2048}) {
    const auto g = wide_grid(n);
    const auto f = projected({1, 4, 1}, g), e = projected({1, 2, 1}, g);
    const double a = weighted_fisher(f, e, 0.0), b = fisher_sqrt_form(f, e);
    gaps.push_back(std::fabs(a - b) / a);
    EXPECT_EQ(fisher_sqrt_form(f, f), 0.0);
  }
  EXPECT_LT(gaps.back(), 1e-6);
  EXPECT_LE(gaps[2], gaps[0]);
}

TEST(CenterDerivative, ExactForQuadraticData) {
  const auto g = Grid::build(0.01, 4, 64, Spacing::Geometric, 4);
  std::vector<double> v;
  for (double c : g->centers()) v.push_back(3.0 * c * c - c + 2.0);
  const auto d = center_derivative(*g, v);
  const auto c = g->centers();
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i], 6.0 * c[i] - 1.0, 1e-9 * (1.0 + std::fabs(6 * c[i])));
}

TEST(CsiszarKullback, Reports) {
  const auto g = wide_grid(16384);
  const auto f = projected({1, 4, 1}, g), e = projected({1, 2, 1}, g);
  const auto same = csiszar_kullback_report(f, f);
  EXPECT_EQ(same.l1, 0.0);
  EXPECT_EQ(same.bound, 0.0);
  EXPECT_TRUE(same.satisfied);
  const auto r = csiszar_kullback_report(f, e);
  EXPECT_TRUE(r.satisfied);
  EXPECT_LE(r.l1, 2.0);
  EXPECT_NEAR(r.bound, 2.0 * std::sqrt(2.0 * oracle::digamma(4) - std::log(6.0)), 1e-5);
}

TEST(TestFunctionals, VarianceValues) {
  EXPECT_NEAR(variance_of(constant_fn(3.0), GenGammaParams{1, 2, 1}), 0.0, 1e-13);
  EXPECT_NEAR(variance_of(identity_fn(), GenGammaParams{1, 2, 1}), 2.0, 1e-10);
  EXPECT_NEAR(variance_of(identity_fn(), GenGammaParams{2, 3, 1}), 12.0, 1e-9);
}

TEST(TestFunctionals, EntropyValues) {
  EXPECT_NEAR(ent_of(constant_fn(2.0), GenGammaParams{1, 2, 1}), 0.0, 1e-13);
  EXPECT_THROW(ent_of(constant_fn(0.0), GenGammaParams{1, 2, 1}), DomainError);
  // psi = sqrt(x / E[X]) has E[psi^2] = 1, so Ent = E[psi^2 log psi^2]
  const GenGammaParams p{1, 2, 1};
  const TestFunction psi([](double x) { return std::sqrt(x / 2.0); }, [](double x) { return 0.25 / std::sqrt(x / 2.0); },
                         "sqrt", 1e3, 1e-3, 1e3);
  const double direct = oracle::integrate_log(
      [](double x) { return (x / 2.0) * std::log(x / 2.0) * oracle::gg_pdf(1, 2, 1, x); }, 1e-300, 100.0);
  EXPECT_NEAR(ent_of(psi, p), direct, 1e-10);
  // Jensen: nonnegative on arbitrary bounded functions
  const TestFunction wave([](double x) { return std::sin(x) + 0.2; }, [](double x) { return std::cos(x); }, "sin", 1.2,
                          1e-3, 1e3);
  EXPECT_GE(ent_of(wave, GenGammaParams{1, 0.7, 1.3}), 0.0);
}
