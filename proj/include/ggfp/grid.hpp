#pragma once

#include <ggfp/densities.hpp>
#include <ggfp/quadrature.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ggfp {

enum class Spacing { Uniform, Geometric, Custom };

std::string to_string(Spacing s);
Spacing spacing_from_string(const std::string& s);

/// Truncated half-line partition e_0 < e_1 < ... < e_N with e_0 > 0.
/// Immutable after construction; shared by every field living on it.
class Grid {
 public:
  static constexpr std::size_t kMinCells = 16;

  static std::shared_ptr<const Grid> build(double x_min, double x_max, std::size_t n_cells, Spacing spacing,
                                           int quad_order);
  static std::shared_ptr<const Grid> from_edges(std::vector<double> edges, int quad_order);

  std::size_t size() const { return centers_.size(); }
  std::span<const double> edges() const { return edges_; }
  std::span<const double> centers() const { return centers_; }
  std::span<const double> widths() const { return widths_; }
  double x_min() const { return edges_.front(); }
  double x_max() const { return edges_.back(); }
  Spacing spacing() const { return spacing_; }
  int quad_order() const { return rule_.order(); }
  const GaussLegendre& rule() const { return rule_; }

  /// Index of the cell containing x (clamped to [0, N-1]).
  std::size_t locate(double x) const;

  /// Same edges (bitwise) and quadrature order.
  bool same_as(const Grid& other) const;

 private:
  Grid(std::vector<double> edges, Spacing spacing, int quad_order);

  std::vector<double> edges_;
  std::vector<double> centers_;
  std::vector<double> widths_;
  Spacing spacing_;
  GaussLegendre rule_;
};

using GridPtr = std::shared_ptr<const Grid>;
using Evaluator = std::function<double(double)>;

/// Cell-average representation of a density on a Grid. Values are
/// nonnegative; a field produced by projection may remember the analytic
/// density it came from so that expectations can use it at quadrature nodes.
class DensityField {
 public:
  DensityField(GridPtr grid, std::vector<double> values, std::shared_ptr<const Evaluator> source_pdf = nullptr);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double mass() const { return mass_; }
  const std::shared_ptr<const Evaluator>& source_pdf() const { return source_pdf_; }

  /// Copy scaled to total mass `target` (drops the analytic source).
  DensityField normalized(double target = 1.0) const;
  /// Copy without the analytic source, forcing piecewise-constant expectations.
  DensityField detached() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  double mass_ = 0.0;
  std::shared_ptr<const Evaluator> source_pdf_;
};

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t cells = 512;
  Spacing spacing = Spacing::Uniform;
  int quad_order = 6;

  GridPtr build() const { return Grid::build(x_min, x_max, cells, spacing, quad_order); }
};

/// Default truncation for an equilibrium: x_min = 1e-4 theta (or the 1e-12
/// lower quantile when more than 1e-6 of the mass lies below it), x_max where
/// the upper tail mass drops below 1e-12; geometric when delta < 1 or kappa < 1.
GridSpec default_grid_spec(const GenGammaParams& p, std::size_t cells = 512, int quad_order = 6);

struct Projection {
  DensityField field;
  /// 1 - mass captured on the grid.
  double tail_mass = 0.0;
  /// tail_mass exceeded the threshold (or the field has no mass at all).
  bool tail_flag = false;
};

Projection project(const Evaluator& pdf, const GridPtr& grid, double tail_threshold = 1e-10);
/// Projection of a closed-form family member; remembers its pdf.
Projection project(const GenGammaParams& p, const GridPtr& grid, double tail_threshold = 1e-10);

/// Projected closed-form density rescaled to unit mass on the grid, without
/// the analytic source (the discrete equilibrium of the solver).
DensityField equilibrium_field(const GenGammaParams& p, const GridPtr& grid);

/// log of the per-cell Gauss-Legendre average of exp(log_density), evaluated
/// with a log-sum-exp so that deep tails do not underflow.
std::vector<double> log_cell_averages(const Evaluator& log_density, const Grid& grid);

double expectation(const DensityField& field, const Evaluator& g);
double l1_distance(const DensityField& f, const DensityField& g);
/// Cumulative mass up to x with linear interpolation inside the cell.
double cdf_of_field(const DensityField& field, double x);
/// Cumulative mass at every edge (N + 1 values, first is 0).
std::vector<double> cumulative_at_edges(const DensityField& field);

void require_same_grid(const DensityField& f, const DensityField& g, const char* what);

/// `x_center,width,value` rows, 17 significant digits.
void write_field_csv(const DensityField& field, std::ostream& os);
void write_field_csv(const DensityField& field, const std::string& path);

}  // namespace ggfp
