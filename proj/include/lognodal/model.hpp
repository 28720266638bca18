#pragma once

#include <array>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "lognodal/quadrature.hpp"

namespace lognodal {

/// Problem data for -Laplace u = lambda u + |u|^{p-2} u + theta u log u^2 on B_R.
struct Params {
  int dim = 6;
  double lambda = 0.0;
  double theta = 1.0;
  double exponent = 3.0;
  double radius = 1.0;

  /// 2N/(N-2).
  double critical_exponent() const { return 2.0 * dim / (dim - 2.0); }
  bool is_critical() const { return exponent == critical_exponent(); }

  /// Throws std::invalid_argument unless N >= 3, theta > 0, 2 < p <= 2*, R > 0.
  void validate() const;

  /// Params at the critical exponent for the given dimension.
  static Params critical(int dim, double lambda, double theta, double radius = 1.0);
};

/// Radial function sampled at the abscissae of a grid, with an optional
/// exact evaluator (value, derivative) between them.
struct RadialFn {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;
  std::vector<double> derivs;
  std::function<std::array<double, 2>(double)> dense;

  RadialFn() = default;
  RadialFn(std::shared_ptr<const RadialGrid> g, std::vector<double> v, std::vector<double> d,
           std::function<std::array<double, 2>(double)> eval = {});

  /// Samples `eval` on every abscissa and keeps it as the dense evaluator.
  static RadialFn sample(std::shared_ptr<const RadialGrid> g,
                         std::function<std::array<double, 2>(double)> eval);

  std::size_t size() const { return values.size(); }
  /// (u(r), u'(r)); falls back to cubic Hermite interpolation of the samples.
  std::array<double, 2> at(double r) const;

  RadialFn scaled(double c) const;
};

/// u log u^2 with the value 0 at u = 0.
double log_nonlinearity(double u);

/// u^2 log u^2 with the value 0 at u = 0.
double log_density(double u);

/// lambda u + |u|^{p-2} u + theta u log u^2.
double nonlinearity(double u, const Params& params);

/// The four integrals every functional is built from.
struct IntegralTerms {
  double grad = 0.0;     // int |u'|^2
  double mass = 0.0;     // int u^2
  double power = 0.0;    // int |u|^p
  double log_mass = 0.0; // int u^2 log u^2
};

IntegralTerms integral_terms(const RadialFn& u, double exponent);
/// Restricted to the grid panels inside [lo, hi].
IntegralTerms integral_terms(const RadialFn& u, double exponent, double lo, double hi);

double energy_from_terms(const IntegralTerms& t, const Params& params);
double nehari_from_terms(const IntegralTerms& t, const Params& params);

double energy(const RadialFn& u, const Params& params);
double nehari_residual(const RadialFn& u, const Params& params);
double reduced_energy(const RadialFn& u, const Params& params);

/// (u+, u-) with u- = min(u, 0).
std::pair<RadialFn, RadialFn> sign_split(const RadialFn& u);

/// The unique s > 0 with G(s u) = 0.
double nehari_project(const RadialFn& u, const Params& params);
double nehari_project(const IntegralTerms& t, const Params& params);

/// (s, t) with G(s u+) = 0 and G(t u-) = 0.
std::pair<double, double> project_sign_changing(const RadialFn& u, const Params& params);

} // namespace lognodal
