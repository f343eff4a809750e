#include <ggfp/grid.hpp>

#include <ggfp/csv.hpp>
#include <ggfp/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ggfp {

std::string to_string(Spacing s) {
  switch (s) {
    case Spacing::Uniform: return "uniform";
    case Spacing::Geometric: return "geometric";
    case Spacing::Custom: return "custom";
  }
  return "custom";
}

Spacing spacing_from_string(const std::string& s) {
  if (s == "uniform") return Spacing::Uniform;
  if (s == "geometric") return Spacing::Geometric;
  throw ParameterError("unknown grid spacing '" + s + "' (expected uniform or geometric)");
}

Grid::Grid(std::vector<double> edges, Spacing spacing, int quad_order)
    : edges_(std::move(edges)), spacing_(spacing), rule_(quad_order) {
  const std::size_t n = edges_.size() - 1;
  centers_.resize(n);
  widths_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    centers_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
    widths_[i] = edges_[i + 1] - edges_[i];
  }
}

std::shared_ptr<const Grid> Grid::build(double x_min, double x_max, std::size_t n_cells, Spacing spacing,
                                        int quad_order) {
  if (!(x_min > 0.0) || !std::isfinite(x_min)) throw ParameterError("build_grid: x_min must be positive");
  if (!(x_max > x_min) || !std::isfinite(x_max)) throw ParameterError("build_grid: x_max must exceed x_min");
  if (n_cells < kMinCells) throw ParameterError("build_grid: at least 16 cells are required");
  if (quad_order < 2 || quad_order > 16) throw ParameterError("build_grid: quad_order must lie in [2, 16]");
  std::vector<double> edges(n_cells + 1);
  const double n = static_cast<double>(n_cells);
  if (spacing == Spacing::Uniform) {
    for (std::size_t i = 0; i <= n_cells; ++i) edges[i] = x_min + (x_max - x_min) * (static_cast<double>(i) / n);
  } else if (spacing == Spacing::Geometric) {
    const double log_ratio = std::log(x_max / x_min) / n;
    for (std::size_t i = 0; i <= n_cells; ++i) edges[i] = x_min * std::exp(log_ratio * static_cast<double>(i));
  } else {
    throw ParameterError("build_grid: spacing must be uniform or geometric");
  }
  edges.front() = x_min;
  edges.back() = x_max;
  return std::shared_ptr<const Grid>(new Grid(std::move(edges), spacing, quad_order));
}

std::shared_ptr<const Grid> Grid::from_edges(std::vector<double> edges, int quad_order) {
  if (edges.size() < kMinCells + 1) throw ParameterError("grid: at least 16 cells are required");
  if (quad_order < 2 || quad_order > 16) throw ParameterError("grid: quad_order must lie in [2, 16]");
  if (!(edges.front() > 0.0)) throw ParameterError("grid: first edge must be positive");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1]) || !std::isfinite(edges[i]))
      throw ParameterError("grid: edges must be finite and strictly increasing");
  }
  return std::shared_ptr<const Grid>(new Grid(std::move(edges), Spacing::Custom, quad_order));
}

std::size_t Grid::locate(double x) const {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  if (it == edges_.begin()) return 0;
  const auto i = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return std::min(i, size() - 1);
}

bool Grid::same_as(const Grid& other) const {
  return this == &other || (quad_order() == other.quad_order() && edges_ == other.edges_);
}

DensityField::DensityField(GridPtr grid, std::vector<double> values, std::shared_ptr<const Evaluator> source_pdf)
    : grid_(std::move(grid)), values_(std::move(values)), source_pdf_(std::move(source_pdf)) {
  if (!grid_) throw ParameterError("density field: grid is null");
  if (values_.size() != grid_->size()) throw ParameterError("density field: value count does not match the grid");
  const auto w = grid_->widths();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
      throw NumericalError("density field: cell values must be finite and nonnegative");
    mass_ += values_[i] * w[i];
  }
}

DensityField DensityField::normalized(double target) const {
  if (!(mass_ > 0.0)) throw NumericalError("density field: cannot normalize a field without mass");
  std::vector<double> v(values_);
  const double s = target / mass_;
  for (double& x : v) x *= s;
  return DensityField(grid_, std::move(v));
}

DensityField DensityField::detached() const { return DensityField(grid_, values_); }

GridSpec default_grid_spec(const GenGammaParams& p, std::size_t cells, int quad_order) {
  p.validate_formula();
  GridSpec spec;
  spec.cells = cells;
  spec.quad_order = quad_order;
  if (p.lognormal_limit) {
    spec.x_min = 1e-4;
    spec.spacing = Spacing::Geometric;
  } else {
    spec.x_min = 1e-4 * p.theta;
    // mass piles up at the origin for small kappa: follow the lower tail instead
    if (cdf(p, spec.x_min) > 1e-6) spec.x_min = quantile(p, 1e-12);
    spec.spacing = (p.delta < 1.0 || p.kappa < 1.0) ? Spacing::Geometric : Spacing::Uniform;
  }
  spec.x_max = upper_quantile(p, 1e-12);
  return spec;
}

std::vector<double> log_cell_averages(const Evaluator& log_density, const Grid& grid) {
  const auto& rule = grid.rule();
  const auto e = grid.edges();
  std::vector<double> out(grid.size());
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double half = 0.5 * (e[i + 1] - e[i]);
    const double mid = 0.5 * (e[i + 1] + e[i]);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < terms.size(); ++q) {
      terms[q] = std::log(0.5 * rule.weights[q]) + log_density(mid + half * rule.nodes[q]);
      peak = std::max(peak, terms[q]);
    }
    if (!std::isfinite(peak)) {
      out[i] = peak;
      continue;
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - peak);
    out[i] = peak + std::log(s);
  }
  return out;
}

namespace {

Projection finish_projection(DensityField field, double tail_threshold) {
  const double tail = 1.0 - field.mass();
  const bool flag = !(field.mass() > 0.0) || tail > tail_threshold;
  return {std::move(field), tail, flag};
}

}  // namespace

Projection project(const Evaluator& density, const GridPtr& grid, double tail_threshold) {
  const auto& rule = grid->rule();
  const auto e = grid->edges();
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double avg = rule.integrate(e[i], e[i + 1], density) / (e[i + 1] - e[i]);
    v[i] = std::max(0.0, avg);
  }
  return finish_projection(DensityField(grid, std::move(v), std::make_shared<const Evaluator>(density)),
                           tail_threshold);
}

Projection project(const GenGammaParams& p, const GridPtr& grid, double tail_threshold) {
  p.validate_formula();
  const auto logs = log_cell_averages([&](double x) { return log_pdf(p, x); }, *grid);
  std::vector<double> v(logs.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(logs[i]);
  auto source = std::make_shared<const Evaluator>([p](double x) { return pdf(p, x); });
  return finish_projection(DensityField(grid, std::move(v), std::move(source)), tail_threshold);
}

DensityField equilibrium_field(const GenGammaParams& p, const GridPtr& grid) {
  return project(p, grid).field.normalized(1.0);
}

double expectation(const DensityField& field, const Evaluator& g) {
  const Grid& grid = field.grid();
  const auto& rule = grid.rule();
  const auto e = grid.edges();
  const Evaluator* source = field.source_pdf().get();
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double half = 0.5 * (e[i + 1] - e[i]);
    const double mid = 0.5 * (e[i + 1] + e[i]);
    double cell = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = mid + half * rule.nodes[q];
      const double gx = g(x);
      if (!std::isfinite(gx)) throw NumericalError("expectation: integrand is not finite at a quadrature node");
      cell += rule.weights[q] * gx * (source ? (*source)(x) : 1.0);
    }
    total += half * cell * (source ? 1.0 : field[i]);
  }
  return total;
}

void require_same_grid(const DensityField& f, const DensityField& g, const char* what) {
  if (!f.grid().same_as(g.grid())) throw ParameterError(std::string(what) + ": fields live on different grids");
}

double l1_distance(const DensityField& f, const DensityField& g) {
  require_same_grid(f, g, "l1_distance");
  const auto w = f.grid().widths();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::fabs(f[i] - g[i]) * w[i];
  return s;
}

double cdf_of_field(const DensityField& field, double x) {
  const Grid& grid = field.grid();
  if (x <= grid.x_min()) return 0.0;
  if (x >= grid.x_max()) return field.mass();
  const auto e = grid.edges();
  const std::size_t k = grid.locate(x);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += field[i] * (e[i + 1] - e[i]);
  return s + field[k] * (x - e[k]);
}

std::vector<double> cumulative_at_edges(const DensityField& field) {
  const auto w = field.grid().widths();
  std::vector<double> c(field.size() + 1, 0.0);
  for (std::size_t i = 0; i < field.size(); ++i) c[i + 1] = c[i] + field[i] * w[i];
  return c;
}

void write_field_csv(const DensityField& field, std::ostream& os) {
  csv::Writer out(os);
  out.header({"x_center", "width", "value"});
  const auto c = field.grid().centers();
  const auto w = field.grid().widths();
  for (std::size_t i = 0; i < field.size(); ++i) {
    out.cell(c[i]).cell(w[i]).cell(field[i]);
    out.end_row();
  }
}

void write_field_csv(const DensityField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field_csv(field, os);
}

}  // namespace ggfp
