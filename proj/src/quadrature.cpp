#include "lognodal/quadrature.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace lognodal {

namespace {

GaussLegendreRule compute_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

} // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 1 || order > 256) throw std::invalid_argument("gauss_legendre: order must be in [1, 256]");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(compute_rule(order));
  return *slot;
}

double sphere_area(int dim) {
  if (dim < 1) throw std::invalid_argument("sphere_area: dim must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

RadialGrid::RadialGrid(int dim, std::vector<double> breaks, int order)
    : dim_(dim), order_(order), breaks_(std::move(breaks)) {
  if (dim < 1) throw std::invalid_argument("RadialGrid: dim must be positive");
  if (order < 5) throw std::invalid_argument("RadialGrid: order must be at least 5");
  if (breaks_.size() < 2) throw std::invalid_argument("RadialGrid: need at least one panel");
  if (breaks_.front() != 0.0) throw std::invalid_argument("RadialGrid: first break must be 0");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1]) || !std::isfinite(breaks_[i]))
      throw std::invalid_argument("RadialGrid: breaks must be finite and strictly increasing");
  const auto& rule = gauss_legendre(order);
  const double omega = sphere_area(dim);
  points_.reserve(panel_count() * order);
  weights_.reserve(panel_count() * order);
  log_weights_.reserve(panel_count() * order);
  for (std::size_t p = 0; p < panel_count(); ++p) {
    const double a = breaks_[p], b = breaks_[p + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int q = 0; q < order; ++q) {
      const double r = mid + half * rule.nodes[q];
      points_.push_back(r);
      weights_.push_back(omega * half * rule.weights[q] * std::pow(r, dim - 1));
      log_weights_.push_back(std::log(omega * half * rule.weights[q]) + (dim - 1) * std::log(r));
    }
  }
}

std::size_t RadialGrid::panel_of(double r) const {
  if (r <= 0.0) return 0;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
  std::size_t idx = static_cast<std::size_t>(it - breaks_.begin());
  if (idx == 0) return 0;
  return std::min(idx - 1, panel_count() - 1);
}

std::pair<std::size_t, std::size_t> RadialGrid::index_range(double lo, double hi) const {
  auto nearest = [&](double r) {
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), r);
    if (it == breaks_.end()) return breaks_.size() - 1;
    std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
    if (i > 0 && std::abs(breaks_[i - 1] - r) < std::abs(breaks_[i] - r)) --i;
    return i;
  };
  const std::size_t a = nearest(lo), b = nearest(hi);
  if (b <= a) return {a * order_, a * order_};
  return {a * order_, b * order_};
}

RadialGrid build_grid(double R, int panels, int order, int dim) {
  if (!(R > 0.0)) throw std::invalid_argument("build_grid: R must be positive");
  if (panels < 8) throw std::invalid_argument("build_grid: need at least 8 panels");
  if (order < 5) throw std::invalid_argument("build_grid: order must be at least 5");
  constexpr double ratio = 1.3;
  std::vector<double> widths(panels);
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    widths[i] = std::pow(ratio, i);
    total += widths[i];
  }
  std::vector<double> breaks{0.0};
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    acc += widths[i] / total * R;
    breaks.push_back(acc);
  }
  breaks.back() = R;
  return RadialGrid(dim, std::move(breaks), order);
}

RadialGrid build_adapted_grid(const AdaptedGridSpec& spec) {
  const double R = spec.radius;
  if (!(R > 0.0)) throw std::invalid_argument("build_adapted_grid: radius must be positive");
  if (!(spec.min_radius > 0.0) || spec.min_radius >= R)
    throw std::invalid_argument("build_adapted_grid: min_radius must lie in (0, R)");
  if (!(spec.ratio > 1.0)) throw std::invalid_argument("build_adapted_grid: ratio must exceed 1");
  std::vector<double> pts;
  for (double r = R; r > spec.min_radius; r /= spec.ratio) pts.push_back(r);
  pts.push_back(spec.min_radius);
  std::vector<double> user;
  for (double b : spec.breaks)
    if (b > 0.0 && b < R) user.push_back(b);
  std::sort(user.begin(), user.end());
  for (double b : user) {
    pts.push_back(b);
    if (!spec.refine_breaks) continue;
    // Gaps shrinking geometrically toward b, bounded by the distance to the
    // neighbouring breaks.
    auto it = std::lower_bound(user.begin(), user.end(), b);
    const double left_room = (it == user.begin()) ? b : b - *(it - 1);
    const double right_room = (it + 1 == user.end()) ? R - b : *(it + 1) - b;
    const double local = b * (spec.ratio - 1.0);
    for (double g = std::min(local, 0.5 * left_room); g > 1e-6 * local; g /= 2.0)
      pts.push_back(b - g);
    for (double g = std::min(local, 0.5 * right_room); g > 1e-6 * local; g /= 2.0)
      pts.push_back(b + g);
  }
  pts.push_back(0.0);
  std::sort(pts.begin(), pts.end());
  std::vector<double> breaks;
  for (double r : pts) {
    if (r < 0.0 || r > R) continue;
    if (!breaks.empty() && r - breaks.back() <= 1e-14 * std::max(r, 1e-300)) continue;
    breaks.push_back(r);
  }
  breaks.back() = R;
  if (breaks.size() < 2) breaks = {0.0, R};
  return RadialGrid(spec.dim, std::move(breaks), spec.order);
}

double integrate(std::span<const double> samples, const RadialGrid& grid) {
  if (samples.size() != grid.size()) throw std::invalid_argument("integrate: sample count does not match grid");
  auto w = grid.weights();
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) throw std::domain_error("integrate: non-finite sample");
    total += w[i] * samples[i];
  }
  return total;
}

double integrate_range(std::span<const double> samples, const RadialGrid& grid, double lo, double hi) {
  if (samples.size() != grid.size()) throw std::invalid_argument("integrate_range: sample count does not match grid");
  auto [first, last] = grid.index_range(lo, hi);
  auto w = grid.weights();
  double total = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    if (!std::isfinite(samples[i])) throw std::domain_error("integrate_range: non-finite sample");
    total += w[i] * samples[i];
  }
  return total;
}

} // namespace lognodal
