#include <ggfp/functionals.hpp>

#include <ggfp/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace ggfp {

std::size_t RatioField::undefined_count() const {
  return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), false));
}

namespace {

void check_support(const DensityField& f, const DensityField& g, const char* what) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > kPositivityFloor && !(g[i] > kPositivityFloor))
      throw DomainError(std::string(what) + ": f has mass where the reference density vanishes");
  }
}

// Fornberg weights for the first derivative at z over nodes x.
template <std::size_t N>
std::array<double, N> first_derivative_weights(double z, const std::array<double, N>& x) {
  std::array<std::array<double, 2>, N> c{};
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < N; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, N> w{};
  for (std::size_t i = 0; i < N; ++i) w[i] = c[i][1];
  return w;
}

}  // namespace

std::vector<double> center_derivative(const Grid& grid, std::span<const double> values) {
  constexpr std::size_t kStencil = 5;
  const std::size_t n = grid.size();
  if (values.size() != n) throw ParameterError("center_derivative: value count does not match the grid");
  const auto c = grid.centers();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t first = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - 2, 0,
                                                         static_cast<std::ptrdiff_t>(n - kStencil));
    std::array<double, kStencil> x{};
    for (std::size_t k = 0; k < kStencil; ++k) x[k] = c[first + k];
    const auto w = first_derivative_weights(c[i], x);
    // weights sum to zero, so differencing against the center makes constants exact
    double s = 0.0;
    for (std::size_t k = 0; k < kStencil; ++k) s += w[k] * (values[first + k] - values[i]);
    d[i] = s;
  }
  return d;
}

RatioField ratio_field(const DensityField& f, const DensityField& g) {
  require_same_grid(f, g, "ratio_field");
  RatioField r{f.grid_ptr(), std::vector<double>(f.size(), 0.0), std::vector<bool>(f.size(), false)};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g[i] > kPositivityFloor) {
      r.values[i] = f[i] / g[i];
      r.defined[i] = std::isfinite(r.values[i]);
      if (!r.defined[i]) r.values[i] = 0.0;
    }
  }
  return r;
}

double relative_entropy(const DensityField& f, const DensityField& g) {
  require_same_grid(f, g, "relative_entropy");
  check_support(f, g, "relative_entropy");
  const auto w = f.grid().widths();
  double h = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > kPositivityFloor) h += w[i] * f[i] * std::log(f[i] / g[i]);
  }
  if (h < 0.0 && h >= -1e-12) return 0.0;
  return h;
}

namespace {

// log(f/g) per cell with the floor applied to f; only used where f > floor
// contributes, so the clamp only touches negligible neighbours.
std::vector<double> log_ratio(const DensityField& f, const DensityField& g) {
  std::vector<double> lr(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double gi = std::max(g[i], kPositivityFloor);
    lr[i] = std::log(std::max(f[i], kPositivityFloor)) - std::log(gi);
  }
  return lr;
}

}  // namespace

double weighted_fisher(const DensityField& f, const DensityField& g, double beta) {
  require_same_grid(f, g, "weighted_fisher");
  if (!(beta >= 0.0)) throw ParameterError("weighted_fisher: beta must be nonnegative");
  check_support(f, g, "weighted_fisher");
  const Grid& grid = f.grid();
  const auto d = center_derivative(grid, log_ratio(f, g));
  const auto w = grid.widths();
  const auto c = grid.centers();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > kPositivityFloor) s += w[i] * std::pow(c[i], beta) * f[i] * d[i] * d[i];
  }
  return s;
}

double fisher_sqrt_form(const DensityField& f, const DensityField& g) {
  require_same_grid(f, g, "fisher_sqrt_form");
  check_support(f, g, "fisher_sqrt_form");
  const Grid& grid = f.grid();
  // undefined cells (g below the floor, hence f too) copy the nearest defined
  // value so that they add no spurious jump to the stencil
  const std::size_t n = f.size();
  std::vector<double> root(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i)
    if (g[i] > kPositivityFloor) root[i] = std::sqrt(f[i] / g[i]);
  for (std::size_t i = 1; i < n; ++i)
    if (std::isnan(root[i])) root[i] = root[i - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    if (std::isnan(root[i])) root[i] = root[i + 1];
  for (auto& r : root)
    if (std::isnan(r)) r = 0.0;
  const auto d = center_derivative(grid, root);
  const auto w = grid.widths();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g[i] > kPositivityFloor) s += w[i] * g[i] * d[i] * d[i];
  }
  return 4.0 * s;
}

CsiszarKullback csiszar_kullback_report(const DensityField& f, const DensityField& g) {
  CsiszarKullback r;
  r.l1 = l1_distance(f, g);
  r.bound = 2.0 * std::sqrt(std::max(0.0, relative_entropy(f, g)));
  r.satisfied = r.l1 <= r.bound + 1e-10;
  return r;
}

double variance_of(const TestFunction& psi, const ProbabilityRule& rule) {
  const double mean = expect(rule, [&](double x) { return psi(x); });
  return expect(rule, [&](double x) {
    const double d = psi(x) - mean;
    return d * d;
  });
}

double variance_of(const TestFunction& psi, const GenGammaParams& p) {
  return variance_of(psi, build_probability_rule(p));
}

double ent_of(const TestFunction& psi, const ProbabilityRule& rule) {
  const double m = expect(rule, [&](double x) {
    const double v = psi(x);
    return v * v;
  });
  if (!(m > 0.0)) throw DomainError("ent_of: psi^2 vanishes identically");
  // u log(u/m) - u + m >= 0 pointwise and integrates to Ent[u]
  return expect(rule, [&](double x) {
    const double u = psi(x) * psi(x);
    return (u > 0.0 ? u * std::log(u / m) : 0.0) - u + m;
  });
}

double ent_of(const TestFunction& psi, const GenGammaParams& p) { return ent_of(psi, build_probability_rule(p)); }

}  // namespace ggfp
