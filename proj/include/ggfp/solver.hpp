#pragma once

#include <ggfp/densities.hpp>
#include <ggfp/grid.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ggfp {

/// Diffusion coefficient D(x) = x^(2-delta) (x^2 in the log-normal limit).
double diffusion(const GenGammaParams& p, double x);
/// Drift of the non-conservative form: (delta/theta^delta) x - (kappa+1-delta) x^(1-delta)
/// (x log x in the log-normal limit).
double raw_drift(const GenGammaParams& p, double x);
/// B = D' + b, so that the equation reads d_t f = d_x [D d_x f + B f]:
/// (delta/theta^delta) x - (kappa-1) x^(1-delta) (2x + x log x in the log-normal limit).
double effective_drift(const GenGammaParams& p, double x);

enum class FluxScheme {
  /// Bernoulli-weighted edge fluxes with the potential read off the projected
  /// equilibrium; the projected equilibrium is an exact discrete fixed point.
  ExponentialFitting,
  /// Same weights with the potential jump taken from B/D at the edge.
  ExponentialFittingMidpoint,
  /// Plain central flux; diagnostic only (not positivity preserving).
  Centered,
};

std::string to_string(FluxScheme s);
FluxScheme flux_scheme_from_string(const std::string& s);

struct SolverConfig {
  /// Time step; 0 selects default_dt(params).
  double dt = 0.0;
  double t_end = 1.0;
  FluxScheme scheme = FluxScheme::ExponentialFitting;
  /// Bound on the relative residual of each tridiagonal solve.
  double linear_tolerance = 1e-10;
  /// Record diagnostics every `cadence` steps (and always at t = 0 and t_end).
  int cadence = 1;
  /// Keep a field snapshot every `snapshot_every` records (0 = none).
  int snapshot_every = 0;

  void validate() const;
};

/// 1e-3 theta^delta / delta^2 (1e-3 in the log-normal limit).
double default_dt(const GenGammaParams& p);

/// Assembled flux-form operator on one grid. Interior edge k (between cells k
/// and k+1) carries G_k = up_k v_{k+1} - down_k v_k, the discrete value of
/// D d_x f + B f; the physical flux is -G. Boundary fluxes are zero.
class FokkerPlanckOperator {
 public:
  FokkerPlanckOperator(GridPtr grid, const GenGammaParams& params, FluxScheme scheme = FluxScheme::ExponentialFitting);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const GenGammaParams& params() const { return params_; }
  FluxScheme scheme() const { return scheme_; }

  /// Projected closed-form equilibrium, normalised to unit mass on the grid.
  const DensityField& equilibrium() const { return equilibrium_; }
  /// Equilibrium mass lost to truncation, 1 - (projected mass).
  double equilibrium_tail_mass() const { return tail_mass_; }

  std::span<const double> up() const { return up_; }
  std::span<const double> down() const { return down_; }

  /// G_k at the N-1 interior edges. With exact fitting the flux is evaluated
  /// as T_k (v_{k+1}/v_inf_{k+1} - v_k/v_inf_k), T_k = down_k v_inf_k.
  std::vector<double> edge_fluxes(std::span<const double> values) const;

  /// One implicit Euler step. Throws NumericalError if the linear residual
  /// exceeds `linear_tolerance` or a value below -1e-14 appears.
  void step_in_place(std::vector<double>& values, double dt, double linear_tolerance = 1e-10) const;
  DensityField step(const DensityField& field, double dt, double linear_tolerance = 1e-10) const;

 private:
  GridPtr grid_;
  GenGammaParams params_;
  FluxScheme scheme_;
  std::vector<double> up_;
  std::vector<double> down_;
  std::vector<double> transmissibility_;
  DensityField equilibrium_;
  double tail_mass_ = 0.0;
};

/// Single implicit Euler step with a freshly assembled operator.
DensityField step(const DensityField& field, const GenGammaParams& params, const SolverConfig& config);

struct TrajectoryRecord {
  double t = 0.0;
  double mass = 0.0;
  double entropy = 0.0;   ///< H(f | f_inf)
  double fisher = 0.0;    ///< I_{2-delta}(f | f_inf)
  double l1 = 0.0;        ///< ||f - f_inf||_1
  std::optional<std::size_t> snapshot;
};

struct Trajectory {
  GenGammaParams params;
  double dt = 0.0;
  std::vector<TrajectoryRecord> records;
  std::vector<DensityField> snapshots;
  std::optional<DensityField> final_field;
  /// Largest |mass(t_{n+1}) - mass(t_n)| over all steps.
  double max_step_mass_change = 0.0;
  /// Smallest cell value seen after any step.
  double min_cell_value = 0.0;
  std::size_t steps = 0;
};

/// Fisher weight exponent 2 - delta (2 in the log-normal limit).
double fisher_exponent(const GenGammaParams& p);

/// Runs implicit Euler from `initial` to config.t_end. The initial mass must
/// be within 1e-6 of 1; it is renormalised to exactly 1.
Trajectory solve(const DensityField& initial, const GenGammaParams& params, const SolverConfig& config);
Trajectory solve(const DensityField& initial, const FokkerPlanckOperator& op, const SolverConfig& config);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

enum class BoundaryRegime { NoFluxNeededWithBC, AbsorbingReflecting, Critical };
std::string to_string(BoundaryRegime r);

/// kappa < delta: no-flux condition selects the solution; kappa > delta: the
/// origin absorbs and reflects, mass is conserved without a condition;
/// kappa == delta: Critical (no continuous-level claim). The log-normal limit
/// has kappa/delta -> infinity and is AbsorbingReflecting.
BoundaryRegime classify_boundary(const GenGammaParams& p);

/// max over interior edges of |G_k| on the projected equilibrium divided by
/// the largest cell value.
double stationary_flux_residual(const GenGammaParams& p, const GridPtr& grid,
                                FluxScheme scheme = FluxScheme::ExponentialFitting);

}  // namespace ggfp
