#include "lognodal/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "lognodal/error.hpp"

namespace lognodal {

double bubble_constant(int dim) {
  return std::pow(static_cast<double>(dim) * (dim - 2), 0.25 * (dim - 2));
}

double bubble_value(double eps, double r, int dim) {
  const double m = 0.5 * (dim - 2);
  // eps^{m} / (eps^2 + r^2)^{m} = (eps / (eps^2 + r^2))^m, kept in ratio form
  // to avoid overflow at tiny eps.
  const double ratio = eps / (eps * eps + r * r);
  return bubble_constant(dim) * std::pow(ratio, m);
}

double bubble_derivative(double eps, double r, int dim) {
  const double m = 0.5 * (dim - 2);
  const double d = eps * eps + r * r;
  return -2.0 * m * r / d * bubble_value(eps, r, dim);
}

double bubble_scale_for_height(double a, int dim) {
  return std::pow(bubble_constant(dim) / std::abs(a), 2.0 / (dim - 2));
}

double sobolev_level(int dim) {
  if (dim < 3) throw std::invalid_argument("sobolev_level: dimension must be at least 3");
  static std::mutex mutex;
  static std::map<int, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(dim); it != cache.end()) return it->second;
  const double crit = 2.0 * dim / (dim - 2.0);
  HalflineOptions opts;
  opts.panels = 96;
  opts.order = 12;
  const double grad = integrate_halfline(
      [&](double r) {
        const double d = bubble_derivative(1.0, r, dim);
        return d * d;
      },
      1.0, dim, opts);
  const double norm = integrate_halfline([&](double r) { return std::pow(bubble_value(1.0, r, dim), crit); },
                                         1.0, dim, opts);
  if (std::abs(grad - norm) > 1e-8 * grad)
    throw SolverError("sobolev_level: gradient and critical-norm integrals disagree");
  cache[dim] = grad;
  return grad;
}

double sobolev_level_closed_form(int dim) {
  if (dim < 3) throw std::invalid_argument("sobolev_level_closed_form: dimension must be at least 3");
  const double n = dim;
  const double s = M_PI * n * (n - 2.0) * std::exp(2.0 / n * (std::lgamma(0.5 * n) - std::lgamma(n)));
  return std::pow(s, 0.5 * n);
}

BubbleIdentity bubble_identity(double eps, int dim) {
  if (!(eps > 0.0)) throw std::invalid_argument("bubble_identity: eps must be positive");
  const double crit = 2.0 * dim / (dim - 2.0);
  HalflineOptions opts;
  opts.panels = 96;
  opts.order = 12;
  BubbleIdentity b;
  b.eps = eps;
  b.grad_sq = integrate_halfline(
      [&](double r) {
        const double d = bubble_derivative(eps, r, dim);
        return d * d;
      },
      eps, dim, opts);
  b.crit_norm = integrate_halfline([&](double r) { return std::pow(bubble_value(eps, r, dim), crit); }, eps, dim,
                                   opts);
  b.mismatch = std::abs(b.grad_sq - b.crit_norm) / sobolev_level(dim);
  return b;
}

double cutoff(double r, double rho) {
  if (r <= rho) return 1.0;
  if (r >= 2.0 * rho) return 0.0;
  const double t = (r - rho) / rho;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double cutoff_derivative(double r, double rho) {
  if (r <= rho || r >= 2.0 * rho) return 0.0;
  const double t = (r - rho) / rho;
  return -30.0 * t * t * (1.0 - t) * (1.0 - t) / rho;
}

void BubbleSpec::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("BubbleSpec: eps must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("BubbleSpec: rho must be positive");
  if (dim < 3) throw std::invalid_argument("BubbleSpec: dimension must be at least 3");
}

std::array<double, 2> psi_eps_at(const BubbleSpec& spec, double r) {
  const double xi = cutoff(r, spec.rho);
  if (xi == 0.0) return {0.0, 0.0};
  const double u = bubble_value(spec.eps, r, spec.dim);
  const double du = bubble_derivative(spec.eps, r, spec.dim);
  return {xi * u, xi * du + cutoff_derivative(r, spec.rho) * u};
}

RadialFn psi_eps(const BubbleSpec& spec, std::shared_ptr<const RadialGrid> grid) {
  spec.validate();
  if (!grid) throw std::invalid_argument("psi_eps: missing grid");
  if (grid->radius() < 2.0 * spec.rho * (1.0 - 1e-12))
    throw std::invalid_argument("psi_eps: grid radius smaller than the cutoff support 2 rho");
  return RadialFn::sample(std::move(grid), [spec](double r) { return psi_eps_at(spec, r); });
}

BubbleQuantity parse_bubble_quantity(const std::string& name) {
  if (name == "grad_sq_defect") return BubbleQuantity::grad_sq_defect;
  if (name == "crit_norm_defect") return BubbleQuantity::crit_norm_defect;
  if (name == "l2_norm") return BubbleQuantity::l2_norm;
  if (name == "l1_norm") return BubbleQuantity::l1_norm;
  if (name == "crit_minus_one_norm") return BubbleQuantity::crit_minus_one_norm;
  if (name == "log_moment") return BubbleQuantity::log_moment;
  throw std::invalid_argument("unknown bubble quantity: " + name);
}

std::string to_string(BubbleQuantity q) {
  switch (q) {
  case BubbleQuantity::grad_sq_defect: return "grad_sq_defect";
  case BubbleQuantity::crit_norm_defect: return "crit_norm_defect";
  case BubbleQuantity::l2_norm: return "l2_norm";
  case BubbleQuantity::l1_norm: return "l1_norm";
  case BubbleQuantity::crit_minus_one_norm: return "crit_minus_one_norm";
  case BubbleQuantity::log_moment: return "log_moment";
  }
  return "unknown";
}

double bubble_quantity(BubbleQuantity q, const BubbleSpec& spec, const RadialGrid& grid) {
  spec.validate();
  const int N = spec.dim;
  const double crit = 2.0 * N / (N - 2.0);
  const double rho = spec.rho, eps = spec.eps;
  HalflineOptions tail;
  tail.offset = 2.0 * rho;
  tail.panels = 64;
  tail.order = 12;
  switch (q) {
  case BubbleQuantity::grad_sq_defect: {
    const double band = integrate_interval(
        [&](double r) {
          const double d = psi_eps_at(spec, r)[1], du = bubble_derivative(eps, r, N);
          return d * d - du * du;
        },
        rho, 2.0 * rho, N, 32, 12);
    const double outer = integrate_halfline(
        [&](double r) {
          const double du = bubble_derivative(eps, r, N);
          return du * du;
        },
        rho, N, tail);
    return band - outer;
  }
  case BubbleQuantity::crit_norm_defect: {
    const double band = integrate_interval(
        [&](double r) {
          const double p = psi_eps_at(spec, r)[0], u = bubble_value(eps, r, N);
          return std::pow(p, crit) - std::pow(u, crit);
        },
        rho, 2.0 * rho, N, 32, 12);
    const double outer =
        integrate_halfline([&](double r) { return std::pow(bubble_value(eps, r, N), crit); }, rho, N, tail);
    return band - outer;
  }
  default: break;
  }
  if (grid.radius() < 2.0 * rho * (1.0 - 1e-12))
    throw std::invalid_argument("bubble_quantity: grid radius smaller than the cutoff support 2 rho");
  auto pts = grid.points();
  std::vector<double> s(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = psi_eps_at(spec, pts[i])[0];
    switch (q) {
    case BubbleQuantity::l2_norm: s[i] = v * v; break;
    case BubbleQuantity::l1_norm: s[i] = v; break;
    case BubbleQuantity::crit_minus_one_norm: s[i] = std::pow(v, crit - 1.0); break;
    case BubbleQuantity::log_moment: s[i] = log_density(v); break;
    default: break;
    }
  }
  return integrate(s, grid);
}

AsymptoticFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys, bool log_corrected) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  std::vector<double> X, Y;
  AsymptoticFit fit;
  fit.log_corrected = log_corrected;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fit.samples.emplace_back(xs[i], ys[i]);
    if (!(xs[i] > 0.0) || !std::isfinite(ys[i]) || ys[i] == 0.0) continue;
    const double x = log_corrected ? std::log(xs[i] * xs[i] * std::abs(std::log(xs[i]))) : std::log(xs[i]);
    X.push_back(x);
    Y.push_back(std::log(std::abs(ys[i])));
  }
  if (X.size() < 5) throw std::invalid_argument("fit_power_law: fewer than 5 usable points");
  const double n = static_cast<double>(X.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) mx += X[i], my += Y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  fit.exponent = sxy / sxx;
  fit.coefficient = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.eps_min = *std::min_element(xs.begin(), xs.end());
  fit.eps_max = *std::max_element(xs.begin(), xs.end());
  return fit;
}

std::vector<double> default_eps_list(double rho) {
  std::vector<double> out;
  for (int k = -10; k <= -4; ++k) out.push_back(std::ldexp(rho, k));
  return out;
}

std::shared_ptr<const RadialGrid> sweep_grid(const BubbleSpec& tmpl, double eps_min, double radius) {
  AdaptedGridSpec g;
  g.dim = tmpl.dim;
  g.radius = radius;
  g.min_radius = 1e-4 * eps_min;
  g.breaks = {tmpl.rho, 2.0 * tmpl.rho};
  g.refine_breaks = false;
  g.order = 10;
  g.ratio = 1.25;
  return std::make_shared<const RadialGrid>(build_adapted_grid(g));
}

AsymptoticFit asymptotic_sweep(BubbleQuantity q, const std::vector<double>& eps_list, const BubbleSpec& tmpl,
                               const RadialGrid& grid) {
  if (eps_list.size() < 5) throw std::invalid_argument("asymptotic_sweep: need at least 5 eps values");
  std::vector<double> values;
  for (double eps : eps_list) {
    if (!(eps > 0.0) || eps > tmpl.rho / 4.0 * (1.0 + 1e-12))
      throw std::invalid_argument("asymptotic_sweep: eps values must lie in (0, rho/4]");
    BubbleSpec s = tmpl;
    s.eps = eps;
    const double v = bubble_quantity(q, s, grid);
    const bool positive_expected = q == BubbleQuantity::l2_norm || q == BubbleQuantity::l1_norm ||
                                   q == BubbleQuantity::crit_minus_one_norm || q == BubbleQuantity::log_moment;
    if (positive_expected && !(v > 0.0))
      throw SolverError("asymptotic_sweep: " + to_string(q) + " is not positive at eps = " + std::to_string(eps));
    values.push_back(v);
  }
  return fit_power_law(eps_list, values, q == BubbleQuantity::log_moment);
}

BubbleVerification verify_bubbles(int dim, double rho, const std::vector<double>& eps_list, double radius) {
  BubbleVerification v;
  v.identities_ok = true;
  for (double eps : {0.1, 1.0, 10.0}) {
    v.identities.push_back(bubble_identity(eps, dim));
    v.identities_ok = v.identities_ok && v.identities.back().mismatch <= 1e-8;
  }
  v.sobolev_numeric = sobolev_level(dim);
  v.sobolev_closed_form = sobolev_level_closed_form(dim);
  v.identities_ok =
      v.identities_ok && std::abs(v.sobolev_numeric - v.sobolev_closed_form) <= 1e-6 * v.sobolev_closed_form;

  BubbleSpec tmpl;
  tmpl.dim = dim;
  tmpl.rho = rho;
  tmpl.validate();
  const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
  auto grid = sweep_grid(tmpl, eps_min, radius);
  const double half = 0.5 * (dim - 2);
  const std::vector<std::tuple<BubbleQuantity, double, double>> targets{
      {BubbleQuantity::grad_sq_defect, dim - 2.0, 0.3},
      {BubbleQuantity::crit_norm_defect, double(dim), 0.5},
      {BubbleQuantity::l2_norm, 2.0, 0.1},
      {BubbleQuantity::l1_norm, half, 0.15},
      {BubbleQuantity::crit_minus_one_norm, half, 0.15},
  };
  v.exponents_ok = true;
  for (const auto& [q, expected, tol] : targets) {
    ExponentCheck e;
    e.quantity = q;
    e.fit = asymptotic_sweep(q, eps_list, tmpl, *grid);
    e.expected = expected;
    e.tolerance = tol;
    e.passed = std::abs(e.fit.exponent - expected) <= tol && e.fit.r_squared >= 0.999;
    v.exponents_ok = v.exponents_ok && e.passed;
    v.exponents.push_back(e);
  }

  auto& lm = v.log_moment;
  lm.fit = asymptotic_sweep(BubbleQuantity::log_moment, eps_list, tmpl, *grid);
  auto sorted = lm.fit.samples;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [eps, y] : sorted) lm.ratios.push_back(y / (eps * eps * std::abs(std::log(eps))));
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const auto [e0, y0] = sorted[i];
    const auto [e1, y1] = sorted[i + 1];
    lm.local_c1.push_back((y0 / (e0 * e0) - y1 / (e1 * e1)) / (std::abs(std::log(e0)) - std::abs(std::log(e1))));
  }
  double lo = lm.local_c1.front(), hi = lo, sum = 0.0;
  for (double c : lm.local_c1) lo = std::min(lo, c), hi = std::max(hi, c), sum += c;
  lm.c1 = sum / lm.local_c1.size();
  lm.spread = (hi - lo) / std::abs(lm.c1);
  lm.passed = lo > 0.0 && lm.spread <= 0.1 && lm.fit.r_squared >= 0.999;

  v.passed = v.identities_ok && v.exponents_ok && lm.passed;
  return v;
}

} // namespace lognodal
