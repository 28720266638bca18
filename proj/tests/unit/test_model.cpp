#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "lognodal/bubbles.hpp"
#include "lognodal/model.hpp"

using namespace lognodal;
using std::numbers::pi;

namespace {

std::shared_ptr<const RadialGrid> unit_grid(int dim) {
  return std::make_shared<const RadialGrid>(build_grid(1.0, 24, 10, dim));
}

RadialFn parabola(int dim, double c = 1.0) {
  return RadialFn::sample(unit_grid(dim), [c](double r) { return std::array<double, 2>{c * (1 - r * r), -2 * c * r}; });
}

// Composite midpoint rule for 4 pi int_0^1 f(r) r^2 dr.
template <class F>
double midpoint3(F f, int n = 200000) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) / n;
    s += f(r) * r * r;
  }
  return 4.0 * pi * s / n;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("critical terms of a bubble survive a core where r^5 underflows") {
  for (double eps : {1e-3, 1e-70}) {
    AdaptedGridSpec spec;
    spec.min_radius = 1e-3 * eps;
    spec.order = 10;
    spec.ratio = 1.2;
    auto grid = std::make_shared<const RadialGrid>(build_adapted_grid(spec));
    const RadialFn u = RadialFn::sample(grid, [eps](double r) {
      return std::array<double, 2>{bubble_value(eps, r, 6), bubble_derivative(eps, r, 6)};
    });
    const IntegralTerms t = integral_terms(u, 3.0);
    CAPTURE(eps);
    CHECK(t.grad == doctest::Approx(sobolev_level_closed_form(6)).epsilon(1e-8));
    CHECK(t.power == doctest::Approx(sobolev_level_closed_form(6)).epsilon(1e-8));
  }
}

TEST_CASE("parameter validation") {
  Params p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.critical_exponent() == 3.0);
  CHECK(p.is_critical());
  p.theta = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = Params{};
  p.exponent = 3.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = Params{};
  p.dim = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(Params::critical(4, 0.0, 1.0).exponent == 4.0);
}

TEST_CASE("nonlinearity at zero and by sign") {
  Params p;
  CHECK(log_nonlinearity(0.0) == 0.0);
  CHECK(log_density(0.0) == 0.0);
  CHECK(log_density(1.0) == 0.0);
  CHECK(log_nonlinearity(std::exp(1.0)) == doctest::Approx(2.0 * std::exp(1.0)));
  for (double u : {0.3, 1.7, 40.0}) CHECK(nonlinearity(-u, p) == doctest::Approx(-nonlinearity(u, p)).epsilon(1e-15));
}

TEST_CASE("integral terms of 1 - r^2 in three dimensions against closed forms") {
  const RadialFn u = parabola(3);
  const IntegralTerms t = integral_terms(u, 3.0);
  CHECK(t.grad == doctest::Approx(16.0 * pi / 5.0).epsilon(1e-13));
  CHECK(t.mass == doctest::Approx(32.0 * pi / 105.0).epsilon(1e-13));
  CHECK(t.power == doctest::Approx(64.0 * pi / 315.0).epsilon(1e-13));
  const double oracle = midpoint3([](double r) { return log_density(1 - r * r); });
  CHECK(t.log_mass == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("energy and Nehari functional are assembled from the terms") {
  Params p;
  p.dim = 3;
  p.exponent = 4.0;
  p.lambda = 0.7;
  p.theta = 1.3;
  const RadialFn u = parabola(3, 2.0);
  const IntegralTerms t = integral_terms(u, p.exponent);
  const double L = 0.5 * t.grad - 0.5 * p.lambda * t.mass - t.power / p.exponent -
                   0.5 * p.theta * (t.log_mass - t.mass);
  const double G = t.grad - p.lambda * t.mass - t.power - p.theta * t.log_mass;
  CHECK(energy(u, p) == doctest::Approx(L).epsilon(1e-14));
  CHECK(nehari_residual(u, p) == doctest::Approx(G).epsilon(1e-14));
}

TEST_CASE("Nehari projection lands on the Nehari set") {
  Params p;
  for (double lambda : {-1.0, 0.0, 2.0})
    for (double c : {0.01, 1.0, 300.0}) {
      p.lambda = lambda;
      const RadialFn u = parabola(6, c);
      const double s = nehari_project(u, p);
      CHECK(s > 0.0);
      const RadialFn v = u.scaled(s);
      CHECK(std::abs(nehari_residual(v, p)) < 1e-12 * integral_terms(v, 3.0).grad);
    }
}

TEST_CASE("projection maximises the energy along the ray") {
  Params p;
  const RadialFn u = parabola(6, 5.0);
  const double s = nehari_project(u, p);
  const double top = energy(u.scaled(s), p);
  for (double f : {0.9, 0.99, 1.01, 1.1}) CHECK(energy(u.scaled(s * f), p) < top);
}

TEST_CASE("sign split and two-sided projection") {
  Params p;
  auto grid = std::make_shared<const RadialGrid>(build_adapted_grid({6, 1.0, 1e-6, {0.5}, 10, 1.3, true}));
  const RadialFn u = RadialFn::sample(grid, [](double r) {
    return std::array<double, 2>{std::cos(pi * r) * (1 - r * r), -pi * std::sin(pi * r) * (1 - r * r) - 2 * r * std::cos(pi * r)};
  });
  auto [pos, neg] = sign_split(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(pos.values[i] >= 0.0);
    CHECK(neg.values[i] <= 0.0);
    CHECK(pos.values[i] + neg.values[i] == doctest::Approx(u.values[i]));
  }
  auto [s, t] = project_sign_changing(u, p);
  CHECK(std::abs(nehari_residual(pos.scaled(s), p)) < 1e-12 * integral_terms(pos.scaled(s), 3.0).grad);
  CHECK(std::abs(nehari_residual(neg.scaled(t), p)) < 1e-12 * integral_terms(neg.scaled(t), 3.0).grad);
}

TEST_CASE("zero function cannot be projected") {
  Params p;
  const RadialFn z = parabola(6, 0.0);
  CHECK_THROWS(nehari_project(z, p));
}

}
