#include <ggfp/densities.hpp>
#include <ggfp/errors.hpp>
#include <ggfp/functionals.hpp>
#include <ggfp/grid.hpp>
#include <ggfp/solver.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ggfp;

namespace {

std::vector<GenGammaParams> equilibrium_matrix() {
  std::vector<GenGammaParams> out;
  for (double delta : {0.25, 0.5, 1.0, 1.5, 2.0})
    for (double r : {0.5, 1.0, 3.0}) out.push_back({1.0, r * delta, delta});
  return out;
}

GridPtr geometric_grid(const GenGammaParams& p, std::size_t cells) {
  GridSpec s = default_grid_spec(p, cells);
  s.spacing = Spacing::Geometric;
  return s.build();
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

TEST(Coefficients, ClosedForms) {
  const GenGammaParams p{2.0, 1.5, 0.5};
  for (double x : {0.01, 0.5, 3.0}) {
    EXPECT_NEAR(diffusion(p, x), std::pow(x, 1.5), 1e-14 * std::pow(x, 1.5));
    const double b = (0.5 / std::sqrt(2.0)) * x - 2.0 * std::pow(x, 0.5);
    EXPECT_NEAR(raw_drift(p, x), b, 1e-14);
    // B = D' + b
    EXPECT_NEAR(effective_drift(p, x), b + 1.5 * std::pow(x, 0.5), 1e-14);
  }
  const auto ln = GenGammaParams::lognormal();
  for (double x : {0.2, 1.0, 4.0}) {
    EXPECT_EQ(diffusion(ln, x), x * x);
    EXPECT_NEAR(effective_drift(ln, x), 2 * x + x * std::log(x), 1e-14);
  }
  EXPECT_EQ(fisher_exponent(p), 1.5);
  EXPECT_EQ(fisher_exponent(ln), 2.0);
}

TEST(Coefficients, ZeroFluxAtClosedFormEquilibrium) {
  // D f' + B f vanishes pointwise on the continuous equilibrium
  for (const auto& p : equilibrium_matrix()) {
    for (double x : {0.3, 1.0, 1.7}) {
      const double flux = diffusion(p, x) * pdf_derivative(p, x) + effective_drift(p, x) * pdf(p, x);
      EXPECT_NEAR(flux, 0.0, 1e-13 * (1.0 + diffusion(p, x) * std::fabs(pdf_derivative(p, x)))) << p.describe();
    }
  }
}

TEST(DefaultDt, Values) {
  EXPECT_NEAR(default_dt({1, 2, 1}), 1e-3, 1e-18);
  EXPECT_NEAR(default_dt({2, 1, 0.5}), 1e-3 * std::sqrt(2.0) / 0.25, 1e-15);
  EXPECT_EQ(default_dt(GenGammaParams::lognormal()), 1e-3);
}

TEST(Schemes, StringRoundTrip) {
  for (auto s : {FluxScheme::ExponentialFitting, FluxScheme::ExponentialFittingMidpoint, FluxScheme::Centered})
    EXPECT_EQ(flux_scheme_from_string(to_string(s)), s);
  EXPECT_THROW(flux_scheme_from_string("upwind"), ParameterError);
}

TEST(Equilibrium, ExactDiscreteFixedPoint) {
  for (const auto& p : equilibrium_matrix()) {
    const auto grid = geometric_grid(p, 512);
    EXPECT_LT(stationary_flux_residual(p, grid), 1e-12) << p.describe();
    const FokkerPlanckOperator op(grid, p);
    std::vector<double> v(op.equilibrium().values().begin(), op.equilibrium().values().end());
    const std::vector<double> v0 = v;
    for (int s = 0; s < 20; ++s) op.step_in_place(v, 0.05);
    // relative per-cell drift; kappa < 1 equilibria are unbounded near the origin
    double drift = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) drift = std::max(drift, std::fabs(v[i] - v0[i]) / v0[i]);
    EXPECT_LT(drift, 1e-12) << p.describe();
  }
}

TEST(Equilibrium, LognormalFixedPoint) {
  const auto p = GenGammaParams::lognormal();
  const auto grid = default_grid_spec(p, 512).build();
  EXPECT_LT(stationary_flux_residual(p, grid), 1e-12);
}

TEST(Equilibrium, CenteredSchemeIsOnlySecondOrder) {
  // the central flux misses the fixed point by O(h^2)
  const GenGammaParams p{1, 2, 1};
  const double r1 = stationary_flux_residual(p, geometric_grid(p, 256), FluxScheme::Centered);
  const double r2 = stationary_flux_residual(p, geometric_grid(p, 512), FluxScheme::Centered);
  EXPECT_GT(r1, 1e-8);
  EXPECT_GT(r1 / r2, 3.0);
  EXPECT_LT(r1 / r2, 5.0);
}

TEST(Equilibrium, MidpointFittingConverges) {
  const GenGammaParams p{1, 2, 1};
  const double r1 = stationary_flux_residual(p, geometric_grid(p, 256), FluxScheme::ExponentialFittingMidpoint);
  const double r2 = stationary_flux_residual(p, geometric_grid(p, 512), FluxScheme::ExponentialFittingMidpoint);
  EXPECT_GT(r1, 0.0);
  EXPECT_LT(r2, r1);
}

TEST(Operator, EdgeFluxesVanishOnEquilibriumAndBalanceCells) {
  const GenGammaParams p{1, 1.5, 0.5};
  const auto grid = geometric_grid(p, 128);
  const FokkerPlanckOperator op(grid, p);
  EXPECT_EQ(max_abs(op.edge_fluxes(op.equilibrium().values())), 0.0);
  EXPECT_EQ(op.up().size(), grid->size() - 1);
  for (std::size_t k = 0; k < op.up().size(); ++k) {
    EXPECT_GT(op.up()[k], 0.0);
    EXPECT_GT(op.down()[k], 0.0);
  }
  EXPECT_GE(op.equilibrium_tail_mass(), 0.0);
  EXPECT_LT(op.equilibrium_tail_mass(), 1e-5);
}

TEST(Solve, MassPositivityAndEntropyMonotone) {
  for (const auto& p : equilibrium_matrix()) {
    const auto grid = geometric_grid(p, 256);
    const GenGammaParams start{p.theta * 1.5, p.kappa * 1.5, p.delta};
    const auto f0 = project(start, grid).field.normalized();
    SolverConfig cfg;
    cfg.t_end = 0.5;
    cfg.dt = 0.25 * default_dt(p);
    cfg.cadence = 10;
    const auto traj = solve(f0, p, cfg);
    EXPECT_LT(traj.max_step_mass_change, 1e-12) << p.describe();
    EXPECT_GE(traj.min_cell_value, 0.0) << p.describe();
    for (std::size_t i = 1; i < traj.records.size(); ++i)
      EXPECT_LE(traj.records[i].entropy, traj.records[i - 1].entropy + 1e-14) << p.describe();
    EXPECT_NEAR(traj.records.back().mass, 1.0, 1e-11);
  }
}

TEST(Solve, PointMassStaysNonnegative) {
  const GenGammaParams p{1, 0.5, 1};
  const auto grid = geometric_grid(p, 200);
  std::vector<double> v(grid->size(), 0.0);
  v[150] = 1.0 / grid->widths()[150];
  SolverConfig cfg;
  cfg.t_end = 0.2;
  cfg.dt = 1e-2;
  const auto traj = solve(DensityField(grid, v), p, cfg);
  EXPECT_GE(traj.min_cell_value, 0.0);
  EXPECT_LT(traj.max_step_mass_change, 1e-12);
}

TEST(Solve, RelaxesToEquilibrium) {
  const GenGammaParams p{1, 2, 1};
  const auto grid = geometric_grid(p, 256);
  SolverConfig cfg;
  cfg.t_end = 12.0;
  cfg.dt = 1e-2;
  cfg.cadence = 100;
  const auto traj = solve(project(GenGammaParams{1, 4, 1}, grid).field.normalized(), p, cfg);
  EXPECT_LT(traj.records.back().l1, 1e-4);
  EXPECT_LT(traj.records.back().entropy, 1e-8);
  for (std::size_t i = 1; i < traj.records.size(); ++i) EXPECT_LE(traj.records[i].l1, traj.records[i - 1].l1);
}

TEST(Solve, RecordsCadenceAndSnapshots) {
  const GenGammaParams p{1, 2, 1};
  const auto grid = geometric_grid(p, 64);
  SolverConfig cfg;
  cfg.t_end = 0.1;
  cfg.dt = 0.01;
  cfg.cadence = 3;
  cfg.snapshot_every = 2;
  const auto traj = solve(project(GenGammaParams{1, 3, 1}, grid).field.normalized(), p, cfg);
  EXPECT_EQ(traj.steps, 10u);
  // t = 0, steps 3, 6, 9 and the final step
  ASSERT_EQ(traj.records.size(), 5u);
  EXPECT_DOUBLE_EQ(traj.records.back().t, 0.1);
  EXPECT_EQ(traj.snapshots.size(), 3u);
  EXPECT_TRUE(traj.records[0].snapshot.has_value());
  EXPECT_FALSE(traj.records[1].snapshot.has_value());
  ASSERT_TRUE(traj.final_field.has_value());
}

TEST(Solve, DefaultDtApplied) {
  const GenGammaParams p{1, 2, 1};
  const auto grid = geometric_grid(p, 64);
  SolverConfig cfg;
  cfg.t_end = 0.01;
  const auto traj = solve(project(GenGammaParams{1, 3, 1}, grid).field.normalized(), p, cfg);
  EXPECT_EQ(traj.steps, 10u);
  EXPECT_NEAR(traj.dt, 1e-3, 1e-15);
}

TEST(Solve, RejectsBadInput) {
  const GenGammaParams p{1, 2, 1};
  const auto grid = geometric_grid(p, 64);
  const auto f = project(GenGammaParams{1, 3, 1}, grid).field.normalized(1.01);
  SolverConfig cfg;
  EXPECT_THROW(solve(f, p, cfg), ParameterError);
  SolverConfig bad;
  bad.cadence = 0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = SolverConfig{};
  bad.dt = -1;
  EXPECT_THROW(bad.validate(), ParameterError);
  const FokkerPlanckOperator op(geometric_grid(p, 32), p);
  EXPECT_THROW(solve(f.normalized(), op, cfg), ParameterError);
}

TEST(Classify, Regimes) {
  EXPECT_EQ(classify_boundary({1, 0.5, 1}), BoundaryRegime::NoFluxNeededWithBC);
  EXPECT_EQ(classify_boundary({1, 2, 1}), BoundaryRegime::AbsorbingReflecting);
  EXPECT_EQ(classify_boundary({1, 1.5, 1.5}), BoundaryRegime::Critical);
  EXPECT_EQ(classify_boundary(GenGammaParams::lognormal()), BoundaryRegime::AbsorbingReflecting);
  EXPECT_EQ(to_string(BoundaryRegime::Critical), "Critical");
}
