#include <ggfp/solver.hpp>

#include <ggfp/csv.hpp>
#include <ggfp/errors.hpp>
#include <ggfp/functionals.hpp>
#include <ggfp/special_functions.hpp>

#include <algorithm>
#include <cmath>

namespace ggfp {

double diffusion(const GenGammaParams& p, double x) {
  if (p.lognormal_limit) return x * x;
  return std::pow(x, 2.0 - p.delta);
}

double raw_drift(const GenGammaParams& p, double x) {
  if (p.lognormal_limit) return x * std::log(x);
  return p.delta / p.theta_pow_delta() * x - (p.kappa + 1.0 - p.delta) * std::pow(x, 1.0 - p.delta);
}

double effective_drift(const GenGammaParams& p, double x) {
  if (p.lognormal_limit) return 2.0 * x + x * std::log(x);
  return p.delta / p.theta_pow_delta() * x - (p.kappa - 1.0) * std::pow(x, 1.0 - p.delta);
}

std::string to_string(FluxScheme s) {
  switch (s) {
    case FluxScheme::ExponentialFitting: return "exponential-fitting";
    case FluxScheme::ExponentialFittingMidpoint: return "exponential-fitting-midpoint";
    case FluxScheme::Centered: return "centered";
  }
  return "exponential-fitting";
}

FluxScheme flux_scheme_from_string(const std::string& s) {
  if (s == "exponential-fitting") return FluxScheme::ExponentialFitting;
  if (s == "exponential-fitting-midpoint") return FluxScheme::ExponentialFittingMidpoint;
  if (s == "centered") return FluxScheme::Centered;
  throw ParameterError("unknown flux scheme '" + s + "'");
}

void SolverConfig::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ParameterError("solver: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("solver: t_end must be nonnegative");
  if (cadence < 1) throw ParameterError("solver: cadence must be at least 1");
  if (snapshot_every < 0) throw ParameterError("solver: snapshot_every must be nonnegative");
  if (!(linear_tolerance > 0.0)) throw ParameterError("solver: linear tolerance must be positive");
}

double default_dt(const GenGammaParams& p) {
  if (p.lognormal_limit) return 1e-3;
  return 1e-3 * p.theta_pow_delta() / (p.delta * p.delta);
}

double fisher_exponent(const GenGammaParams& p) { return p.lognormal_limit ? 2.0 : 2.0 - p.delta; }

FokkerPlanckOperator::FokkerPlanckOperator(GridPtr grid, const GenGammaParams& params, FluxScheme scheme)
    : grid_(std::move(grid)),
      params_(params),
      scheme_(scheme),
      equilibrium_(grid_ ? grid_ : throw ParameterError("operator: grid is null"),
                   std::vector<double>(grid_->size(), 0.0)) {
  params_.validate_formula();
  const Grid& g = *grid_;
  const std::size_t n = g.size();
  const auto log_eq = log_cell_averages([&](double x) { return log_pdf(params_, x); }, g);

  const auto projected = project(params_, grid_);
  tail_mass_ = projected.tail_mass;
  equilibrium_ = projected.field.normalized(1.0);

  const auto c = g.centers();
  const auto e = g.edges();
  up_.resize(n - 1);
  down_.resize(n - 1);
  transmissibility_.assign(n - 1, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = c[k + 1] - c[k];
    const double edge = e[k + 1];
    const double d_over_h = diffusion(params_, edge) / h;
    switch (scheme_) {
      case FluxScheme::ExponentialFitting:
      case FluxScheme::ExponentialFittingMidpoint: {
        // jump of the potential -log f_inf across the edge
        const double jump = scheme_ == FluxScheme::ExponentialFitting
                                ? log_eq[k] - log_eq[k + 1]
                                : effective_drift(params_, edge) / diffusion(params_, edge) * h;
        up_[k] = d_over_h * special::bernoulli(-jump);
        down_[k] = d_over_h * special::bernoulli(jump);
        if (scheme_ == FluxScheme::ExponentialFitting) transmissibility_[k] = down_[k] * equilibrium_[k];
        break;
      }
      case FluxScheme::Centered: {
        const double b = effective_drift(params_, edge);
        up_[k] = d_over_h + 0.5 * b;
        down_[k] = d_over_h - 0.5 * b;
        break;
      }
    }
  }
}

std::vector<double> FokkerPlanckOperator::edge_fluxes(std::span<const double> v) const {
  if (v.size() != grid_->size()) throw ParameterError("edge_fluxes: value count does not match the grid");
  std::vector<double> g(up_.size());
  const auto eq = equilibrium_.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (transmissibility_[k] > 0.0 && eq[k + 1] > 0.0) {
      // Slotboom form T_k (h_{k+1} - h_k), h = v / v_inf: differences of O(1)
      // ratios instead of two products of size D/h
      g[k] = transmissibility_[k] * (v[k + 1] / eq[k + 1] - v[k] / eq[k]);
    } else {
      g[k] = up_[k] * v[k + 1] - down_[k] * v[k];
    }
  }
  return g;
}

void FokkerPlanckOperator::step_in_place(std::vector<double>& v, double dt, double linear_tolerance) const {
  const std::size_t n = grid_->size();
  if (v.size() != n) throw ParameterError("step: value count does not match the grid");
  if (!(dt > 0.0)) throw ParameterError("step: dt must be positive");
  const auto w = grid_->widths();

  // Rows scaled by the cell widths give a column-diagonally-dominant M-matrix
  // with column sums exactly w_j. Eliminating with those sums carried along
  // (sigma) makes every operation a sum of same-sign terms, except for the
  // centered scheme where coefficients may change sign.
  std::vector<double> diag(n), rhs(n);
  double sigma = w[0];
  diag[0] = sigma + (n > 1 ? dt * down_[0] : 0.0);
  rhs[0] = w[0] * v[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double coupling = dt * up_[i - 1] / diag[i - 1];
    sigma = w[i] + coupling * sigma;
    diag[i] = sigma + (i + 1 < n ? dt * down_[i] : 0.0);
    rhs[i] = w[i] * v[i] + dt * down_[i - 1] * rhs[i - 1] / diag[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] + dt * up_[i] * x[i + 1]) / diag[i];

  // componentwise residual of the original system, each row measured against
  // the magnitudes of its own terms
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = w[i] * x[i], mag = std::fabs(row) + w[i] * std::fabs(v[i]);
    if (i + 1 < n) {
      row -= dt * (up_[i] * x[i + 1] - down_[i] * x[i]);
      mag += dt * (std::fabs(up_[i] * x[i + 1]) + std::fabs(down_[i] * x[i]));
    }
    if (i > 0) {
      row += dt * (up_[i - 1] * x[i] - down_[i - 1] * x[i - 1]);
      mag += dt * (std::fabs(up_[i - 1] * x[i]) + std::fabs(down_[i - 1] * x[i - 1]));
    }
    const double r = std::fabs(row - w[i] * v[i]);
    if (!std::isfinite(r)) worst = r;
    else if (r > 0.0) worst = std::max(worst, mag > 0.0 ? r / mag : INFINITY);
  }
  if (!(worst <= linear_tolerance))
    throw NumericalError("step: tridiagonal solve failed (residual above tolerance)");

  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < -1e-14) throw NumericalError("step: negative density value produced");
    v[i] = std::max(0.0, x[i]);
  }
}

DensityField FokkerPlanckOperator::step(const DensityField& field, double dt, double linear_tolerance) const {
  if (!field.grid().same_as(*grid_)) throw ParameterError("step: field lives on a different grid");
  std::vector<double> v(field.values().begin(), field.values().end());
  step_in_place(v, dt, linear_tolerance);
  return DensityField(grid_, std::move(v));
}

DensityField step(const DensityField& field, const GenGammaParams& params, const SolverConfig& config) {
  config.validate();
  const FokkerPlanckOperator op(field.grid_ptr(), params, config.scheme);
  const double dt = config.dt > 0.0 ? config.dt : default_dt(params);
  return op.step(field, dt, config.linear_tolerance);
}

namespace {

TrajectoryRecord diagnostics(double t, const DensityField& f, const FokkerPlanckOperator& op) {
  TrajectoryRecord r;
  r.t = t;
  r.mass = f.mass();
  r.entropy = relative_entropy(f, op.equilibrium());
  r.fisher = weighted_fisher(f, op.equilibrium(), fisher_exponent(op.params()));
  r.l1 = l1_distance(f, op.equilibrium());
  return r;
}

}  // namespace

Trajectory solve(const DensityField& initial, const GenGammaParams& params, const SolverConfig& config) {
  config.validate();
  const FokkerPlanckOperator op(initial.grid_ptr(), params, config.scheme);
  return solve(initial, op, config);
}

Trajectory solve(const DensityField& initial, const FokkerPlanckOperator& op, const SolverConfig& config) {
  config.validate();
  if (!initial.grid().same_as(op.grid())) throw ParameterError("solve: initial field lives on a different grid");
  if (std::fabs(initial.mass() - 1.0) > 1e-6)
    throw ParameterError("solve: initial mass must be within 1e-6 of 1 (got " + csv::format(initial.mass()) + ")");

  const double dt_nominal = config.dt > 0.0 ? config.dt : default_dt(op.params());
  const auto steps = static_cast<std::size_t>(std::ceil(config.t_end / dt_nominal - 1e-9));
  const double dt = steps > 0 ? config.t_end / static_cast<double>(steps) : dt_nominal;

  Trajectory traj;
  traj.params = op.params();
  traj.dt = dt;
  traj.steps = steps;

  DensityField current = initial.normalized(1.0);
  std::vector<double> v(current.values().begin(), current.values().end());
  traj.min_cell_value = *std::min_element(v.begin(), v.end());

  auto record = [&](double t, const DensityField& f) {
    TrajectoryRecord r = diagnostics(t, f, op);
    if (config.snapshot_every > 0 && traj.records.size() % static_cast<std::size_t>(config.snapshot_every) == 0) {
      r.snapshot = traj.snapshots.size();
      traj.snapshots.push_back(f);
    }
    traj.records.push_back(r);
  };
  record(0.0, current);

  double mass = current.mass();
  for (std::size_t s = 1; s <= steps; ++s) {
    op.step_in_place(v, dt, config.linear_tolerance);
    DensityField next(op.grid_ptr(), v);
    traj.max_step_mass_change = std::max(traj.max_step_mass_change, std::fabs(next.mass() - mass));
    traj.min_cell_value = std::min(traj.min_cell_value, *std::min_element(v.begin(), v.end()));
    mass = next.mass();
    if (s % static_cast<std::size_t>(config.cadence) == 0 || s == steps) record(dt * static_cast<double>(s), next);
    if (s == steps) current = std::move(next);
  }
  traj.final_field = current;
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  csv::Writer out(path);
  out.header({"t", "mass", "H", "I", "L1"});
  for (const auto& r : traj.records) {
    out.cell(r.t).cell(r.mass).cell(r.entropy).cell(r.fisher).cell(r.l1);
    out.end_row();
  }
}

std::string to_string(BoundaryRegime r) {
  switch (r) {
    case BoundaryRegime::NoFluxNeededWithBC: return "NoFluxNeededWithBC";
    case BoundaryRegime::AbsorbingReflecting: return "AbsorbingReflecting";
    case BoundaryRegime::Critical: return "Critical";
  }
  return "Critical";
}

BoundaryRegime classify_boundary(const GenGammaParams& p) {
  p.validate();
  if (p.lognormal_limit) return BoundaryRegime::AbsorbingReflecting;
  if (std::fabs(p.kappa - p.delta) <= 1e-12 * p.delta) return BoundaryRegime::Critical;
  return p.kappa < p.delta ? BoundaryRegime::NoFluxNeededWithBC : BoundaryRegime::AbsorbingReflecting;
}

double stationary_flux_residual(const GenGammaParams& p, const GridPtr& grid, FluxScheme scheme) {
  const FokkerPlanckOperator op(grid, p, scheme);
  const auto eq = op.equilibrium().values();
  const auto g = op.edge_fluxes(eq);
  double worst = 0.0;
  for (double x : g) worst = std::max(worst, std::fabs(x));
  return worst / *std::max_element(eq.begin(), eq.end());
}

}  // namespace ggfp
