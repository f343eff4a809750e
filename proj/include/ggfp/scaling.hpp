#pragma once

#include <ggfp/densities.hpp>
#include <ggfp/grid.hpp>
#include <ggfp/solver.hpp>

#include <string>
#include <vector>

namespace ggfp {

/// The power map x -> x^m between family members: (theta, kappa, delta) goes
/// to (theta^m, kappa/m, delta/m) and time t to m^2 t.
struct ScalingMap {
  double m = 1.0;
  GenGammaParams source;
  GenGammaParams target;
  bool exponent_out_of_range = false;

  ScalingMap(const GenGammaParams& source, double m);
  ScalingMap inverse() const;
};

double time_map(double t, double m);

/// Grid with edges e_i^m.
GridPtr map_grid(const Grid& source, double m);

/// Law of X^m for X distributed by `field`: the output cdf at y equals the
/// input cdf at y^(1/m) at every target edge; mass is redistributed
/// conservatively with the piecewise-linear input cdf.
DensityField pushforward_power(const DensityField& field, double m, const GridPtr& target_grid);

struct ScalingReport {
  double m = 1.0;
  double t = 0.0;
  std::size_t n_cells = 0;
  double sup_cdf_diff = 0.0;
  double tolerance = 5e-3;
  bool pass = false;
};

/// Route A: solve with the source parameters to time t and push forward by m.
/// Route B: push the initial field forward and solve the target equation to
/// time m^2 t (with time step m^2 dt). Reports the sup over target edges of
/// |CDF_A - CDF_B|.
ScalingReport scaling_equivalence_report(const GenGammaParams& source, const DensityField& initial, double m, double t,
                                         const SolverConfig& config, double tolerance = 5e-3);

void write_scaling_csv(const std::vector<ScalingReport>& reports, const std::string& path);

}  // namespace ggfp
