#include "lognodal/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lognodal/error.hpp"

namespace lognodal {

void Params::validate() const {
  if (dim < 3) throw std::invalid_argument("Params: dimension must be at least 3");
  if (!(theta > 0.0)) throw std::invalid_argument("Params: theta must be positive");
  if (!std::isfinite(lambda)) throw std::invalid_argument("Params: lambda must be finite");
  if (!(exponent > 2.0) || exponent > critical_exponent())
    throw std::invalid_argument("Params: exponent must lie in (2, 2N/(N-2)]");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("Params: radius must be positive");
}

Params Params::critical(int dim, double lambda, double theta, double radius) {
  Params p;
  p.dim = dim;
  p.lambda = lambda;
  p.theta = theta;
  p.exponent = 2.0 * dim / (dim - 2.0);
  p.radius = radius;
  p.validate();
  return p;
}

RadialFn::RadialFn(std::shared_ptr<const RadialGrid> g, std::vector<double> v, std::vector<double> d,
                   std::function<std::array<double, 2>(double)> eval)
    : grid(std::move(g)), values(std::move(v)), derivs(std::move(d)), dense(std::move(eval)) {
  if (!grid) throw std::invalid_argument("RadialFn: missing grid");
  if (values.size() != grid->size() || derivs.size() != grid->size())
    throw std::invalid_argument("RadialFn: sample count does not match grid");
}

RadialFn RadialFn::sample(std::shared_ptr<const RadialGrid> g, std::function<std::array<double, 2>(double)> eval) {
  if (!g) throw std::invalid_argument("RadialFn::sample: missing grid");
  std::vector<double> v(g->size()), d(g->size());
  auto pts = g->points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto [u, du] = eval(pts[i]);
    v[i] = u;
    d[i] = du;
  }
  return RadialFn(std::move(g), std::move(v), std::move(d), std::move(eval));
}

std::array<double, 2> RadialFn::at(double r) const {
  if (dense) return dense(r);
  auto pts = grid->points();
  if (pts.empty()) return {0.0, 0.0};
  if (r <= pts.front()) return {values.front(), derivs.front()};
  if (r >= pts.back()) return {values.back(), derivs.back()};
  auto it = std::upper_bound(pts.begin(), pts.end(), r);
  const std::size_t j = static_cast<std::size_t>(it - pts.begin());
  const std::size_t i = j - 1;
  const double h = pts[j] - pts[i];
  const double t = (r - pts[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  const double u = h00 * values[i] + h10 * h * derivs[i] + h01 * values[j] + h11 * h * derivs[j];
  const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
  const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
  const double du = (d00 * values[i] + d01 * values[j]) / h + d10 * derivs[i] + d11 * derivs[j];
  return {u, du};
}

RadialFn RadialFn::scaled(double c) const {
  RadialFn out = *this;
  for (auto& v : out.values) v *= c;
  for (auto& d : out.derivs) d *= c;
  if (dense) {
    auto inner = dense;
    out.dense = [inner, c](double r) {
      auto [u, du] = inner(r);
      return std::array<double, 2>{c * u, c * du};
    };
  }
  return out;
}

double log_nonlinearity(double u) {
  if (u == 0.0) return 0.0;
  return u * std::log(u * u);
}

double log_density(double u) {
  if (u == 0.0) return 0.0;
  const double a = std::abs(u);
  return 2.0 * a * a * std::log(a);
}

double nonlinearity(double u, const Params& params) {
  if (u == 0.0) return 0.0;
  const double a = std::abs(u);
  return params.lambda * u + std::pow(a, params.exponent - 2.0) * u + params.theta * 2.0 * u * std::log(a);
}

namespace {

IntegralTerms terms_on(const RadialFn& u, double exponent, std::size_t first, std::size_t last) {
  auto lw = u.grid->log_weights();
  IntegralTerms t;
  for (std::size_t i = first; i < last; ++i) {
    const double v = u.values[i], d = u.derivs[i];
    if (!std::isfinite(v) || !std::isfinite(d)) throw std::domain_error("integral_terms: non-finite sample");
    // Weights are folded in before squaring so that steep cores at tiny radii
    // neither overflow nor lose their weight to underflow.
    const double a = std::abs(v), sw = std::exp(0.5 * lw[i]);
    const double gd = sw * d, mv = sw * a;
    t.grad += gd * gd;
    t.mass += mv * mv;
    t.power += std::pow(std::exp(lw[i] / exponent) * a, exponent);
    if (a > 0.0) t.log_mass += 2.0 * mv * mv * std::log(a);
  }
  return t;
}

} // namespace

IntegralTerms integral_terms(const RadialFn& u, double exponent) {
  return terms_on(u, exponent, 0, u.size());
}

IntegralTerms integral_terms(const RadialFn& u, double exponent, double lo, double hi) {
  auto [first, last] = u.grid->index_range(lo, hi);
  return terms_on(u, exponent, first, last);
}

double energy_from_terms(const IntegralTerms& t, const Params& params) {
  const double p = params.exponent;
  return 0.5 * t.grad - 0.5 * params.lambda * t.mass - t.power / p -
         0.5 * params.theta * (t.log_mass - t.mass);
}

double nehari_from_terms(const IntegralTerms& t, const Params& params) {
  return t.grad - params.lambda * t.mass - t.power - params.theta * t.log_mass;
}

double energy(const RadialFn& u, const Params& params) {
  return energy_from_terms(integral_terms(u, params.exponent), params);
}

double nehari_residual(const RadialFn& u, const Params& params) {
  auto t = integral_terms(u, params.exponent);
  if (!(t.power > 1e-300)) throw std::invalid_argument("nehari_residual: function is numerically zero");
  return nehari_from_terms(t, params);
}

double reduced_energy(const RadialFn& u, const Params& params) {
  auto t = integral_terms(u, params.exponent);
  return (0.5 - 1.0 / params.exponent) * t.power + 0.5 * params.theta * t.mass;
}

std::pair<RadialFn, RadialFn> sign_split(const RadialFn& u) {
  RadialFn pos = u, neg = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.values[i] > 0.0) {
      neg.values[i] = 0.0;
      neg.derivs[i] = 0.0;
    } else if (u.values[i] < 0.0) {
      pos.values[i] = 0.0;
      pos.derivs[i] = 0.0;
    } else {
      pos.values[i] = neg.values[i] = 0.0;
      pos.derivs[i] = neg.derivs[i] = 0.0;
    }
  }
  if (u.dense) {
    auto inner = u.dense;
    pos.dense = [inner](double r) {
      auto v = inner(r);
      return v[0] > 0.0 ? v : std::array<double, 2>{0.0, 0.0};
    };
    neg.dense = [inner](double r) {
      auto v = inner(r);
      return v[0] < 0.0 ? v : std::array<double, 2>{0.0, 0.0};
    };
  }
  return {pos, neg};
}

double nehari_project(const IntegralTerms& t, const Params& params) {
  params.validate();
  if (!(t.power > 1e-300) || !(t.mass > 0.0))
    throw std::invalid_argument("nehari_project: function is numerically zero");
  const double A = t.grad - params.lambda * t.mass - params.theta * t.log_mass;
  const double P = t.power, Q = t.mass, q = params.exponent - 2.0, th = params.theta;
  // h in the variable x = log s; strictly decreasing.
  auto h = [&](double x) { return A - std::exp(q * x) * P - 2.0 * th * x * Q; };
  auto dh = [&](double x) { return -q * std::exp(q * x) * P - 2.0 * th * Q; };
  double lo = -std::log(1e6), hi = std::log(1e6);
  for (int i = 0; i < 200 && h(lo) <= 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 200 && h(hi) >= 0.0; ++i) hi *= 2.0;
  if (!(h(lo) > 0.0) || !(h(hi) < 0.0)) throw SolverError("nehari_project: failed to bracket the projection");
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 50; ++i) {
    const double step = h(x) / dh(x);
    double next = x - step;
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    (h(next) > 0.0 ? lo : hi) = next;
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return std::exp(x);
}

double nehari_project(const RadialFn& u, const Params& params) {
  return nehari_project(integral_terms(u, params.exponent), params);
}

std::pair<double, double> project_sign_changing(const RadialFn& u, const Params& params) {
  auto [pos, neg] = sign_split(u);
  auto tp = integral_terms(pos, params.exponent);
  auto tn = integral_terms(neg, params.exponent);
  if (!(tp.power > 1e-300)) throw std::invalid_argument("project_sign_changing: positive part vanishes");
  if (!(tn.power > 1e-300)) throw std::invalid_argument("project_sign_changing: negative part vanishes");
  return {nehari_project(tp, params), nehari_project(tn, params)};
}

} // namespace lognodal
