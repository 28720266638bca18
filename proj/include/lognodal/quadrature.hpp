#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lognodal {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights of the `order`-point rule (Newton iteration on P_n).
const GaussLegendreRule& gauss_legendre(int order);

/// Area of the unit sphere S^{N-1} in R^N, 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int dim);

/// Composite Gauss–Legendre grid on [0, R] carrying the radial measure
/// omega_{N-1} r^{N-1} dr, so that sums over it equal N-dimensional integrals
/// over the ball B_R.
class RadialGrid {
public:
  RadialGrid(int dim, std::vector<double> breaks, int order);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  double radius() const noexcept { return breaks_.back(); }

  /// Panel edges: breaks()[0] == 0, breaks().back() == R.
  const std::vector<double>& breaks() const noexcept { return breaks_; }
  std::size_t panel_count() const noexcept { return breaks_.size() - 1; }

  std::span<const double> points() const noexcept { return points_; }
  /// Full measure weights (Gauss weight * omega_{N-1} * r^{N-1}).
  std::span<const double> weights() const noexcept { return weights_; }
  /// Natural logs of the weights. These stay finite where r^{N-1} underflows.
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// Abscissa index range [first, last) covering the panels inside [lo, hi].
  /// lo and hi are snapped to the nearest panel edges.
  std::pair<std::size_t, std::size_t> index_range(double lo, double hi) const;

  /// Index of the panel containing r (the last panel for r == R).
  std::size_t panel_of(double r) const;

private:
  int dim_;
  int order_;
  std::vector<double> breaks_;
  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
};

/// Geometrically graded grid: panel widths grow by 1.3 from the centre
/// outwards, so the innermost panel resolves the r^{N-1} weight.
RadialGrid build_grid(double R, int panels, int order, int dim);

/// Grid for functions with structure on many scales.
struct AdaptedGridSpec {
  int dim = 6;
  double radius = 1.0;
  /// Smallest resolved radius; [0, min_radius] is a single panel.
  double min_radius = 1e-8;
  /// Radii that must be panel edges (nodes, cutoff plateau ends, ...).
  std::vector<double> breaks;
  int order = 8;
  double ratio = 1.3;
  /// Additional geometric refinement toward every break from both sides.
  bool refine_breaks = true;
};

/// Log-uniform panels (ratio `ratio`) from R down to min_radius, with every
/// requested break inserted as a panel edge.
RadialGrid build_adapted_grid(const AdaptedGridSpec& spec);

/// Sum of samples (one per abscissa) against the radial measure.
double integrate(std::span<const double> samples, const RadialGrid& grid);

/// Same, restricted to the panels inside [lo, hi].
double integrate_range(std::span<const double> samples, const RadialGrid& grid,
                       double lo, double hi);

template <class F>
  requires std::invocable<F, double>
double integrate(F&& f, const RadialGrid& grid) {
  std::vector<double> samples(grid.size());
  auto pts = grid.points();
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = f(pts[i]);
  return integrate(std::span<const double>(samples), grid);
}

/// Integral of f over [lo, hi] against omega_{N-1} r^{N-1} dr with uniform
/// panels.
template <class F>
double integrate_interval(F&& f, double lo, double hi, int dim, int panels = 32, int order = 10) {
  if (!(hi >= lo) || lo < 0.0) throw std::invalid_argument("integrate_interval: need 0 <= lo <= hi");
  const auto& rule = gauss_legendre(order);
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double half = 0.5 * width, mid = a + half;
    double panel = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double r = mid + half * rule.nodes[q];
      const double val = f(r);
      if (!std::isfinite(val))
        throw std::domain_error("integrate_interval: non-finite integrand at r = " + std::to_string(r));
      panel += rule.weights[q] * val * std::pow(r, dim - 1);
    }
    total += half * panel;
  }
  return sphere_area(dim) * total;
}

struct HalflineOptions {
  /// Integration starts at r = offset (default: the origin).
  double offset = 0.0;
  int panels = 64;
  int order = 10;
};

/// Improper integral of f over [offset, inf) against omega_{N-1} r^{N-1} dr
/// through r = offset + scale * s / (1 - s). Throws if the transformed
/// integrand does not decay over the final panels.
template <class F>
double integrate_halfline(F&& f, double scale, int dim, const HalflineOptions& opts = {}) {
  if (!(scale > 0.0)) throw std::invalid_argument("integrate_halfline: scale must be positive");
  if (dim < 1) throw std::invalid_argument("integrate_halfline: dim must be positive");
  const auto& rule = gauss_legendre(opts.order);
  const double omega = sphere_area(dim);
  // Panels in s: uniform on [0, 1/2], then geometrically shrinking toward s = 1
  // so that algebraic tails in r are sampled out to r ~ scale * 1e12.
  std::vector<double> edges{0.0};
  const int inner = opts.panels / 2;
  for (int i = 1; i <= inner; ++i) edges.push_back(0.5 * i / inner);
  const int outer = opts.panels - inner;
  for (int i = 1; i <= outer; ++i) {
    const double gap = 0.5 * std::pow(1e-12 / 0.5, static_cast<double>(i) / outer);
    edges.push_back(1.0 - gap);
  }
  double total = 0.0;
  double last_panel_peak = 0.0;
  double prev_panel_peak = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double panel = 0.0, peak = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = mid + half * rule.nodes[q];
      const double one_minus = 1.0 - s;
      const double x = scale * s / one_minus;
      const double r = opts.offset + x;
      const double jac = scale / (one_minus * one_minus);
      const double val = f(r);
      if (!std::isfinite(val))
        throw std::domain_error("integrate_halfline: non-finite integrand at r = " + std::to_string(r));
      const double dens = val * std::pow(r, dim - 1);
      panel += rule.weights[q] * dens * jac;
      peak = std::max(peak, std::abs(dens));
    }
    total += half * panel;
    prev_panel_peak = last_panel_peak;
    last_panel_peak = peak;
  }
  if (last_panel_peak > prev_panel_peak && last_panel_peak > 1e-300)
    throw std::domain_error("integrate_halfline: integrand * r^{N-1} is not decaying at infinity");
  return omega * total;
}

} // namespace lognodal
