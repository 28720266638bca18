#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lognodal/quadrature.hpp"

using namespace lognodal;
using std::numbers::pi;

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre rule is exact up to degree 2n-1") {
  for (int n : {2, 5, 8, 12}) {
    const auto& rule = gauss_legendre(n);
    double w = 0.0, top = 0.0, over = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      w += rule.weights[i];
      top += rule.weights[i] * std::pow(rule.nodes[i], 2 * n - 2);
      over += rule.weights[i] * std::pow(rule.nodes[i], 2 * n);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(top == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
    CHECK(std::abs(over - 2.0 / (2 * n + 1)) > 1e-12);
  }
}

TEST_CASE("sphere areas") {
  CHECK(sphere_area(3) == doctest::Approx(4.0 * pi).epsilon(1e-15));
  CHECK(sphere_area(6) == doctest::Approx(pi * pi * pi).epsilon(1e-15));
  CHECK(sphere_area(2) == doctest::Approx(2.0 * pi).epsilon(1e-15));
}

TEST_CASE("grid integrates the ball volume and radial moments") {
  const RadialGrid g6 = build_grid(1.0, 20, 8, 6);
  CHECK(integrate([](double) { return 1.0; }, g6) == doctest::Approx(pi * pi * pi / 6.0).epsilon(1e-13));
  const RadialGrid g3 = build_grid(1.0, 20, 8, 3);
  CHECK(integrate([](double r) { return r * r; }, g3) == doctest::Approx(4.0 * pi / 5.0).epsilon(1e-13));
  const RadialGrid big = build_grid(2.0, 30, 10, 6);
  CHECK(integrate([](double) { return 1.0; }, big) == doctest::Approx(64.0 * pi * pi * pi / 6.0).epsilon(1e-13));
}

TEST_CASE("range integration splits additively") {
  AdaptedGridSpec s;
  s.dim = 4;
  s.min_radius = 1e-6;
  s.breaks = {0.3, 0.7};
  const RadialGrid g = build_adapted_grid(s);
  std::vector<double> f(g.size());
  auto pts = g.points();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-pts[i]);
  const double whole = integrate(f, g);
  const double parts = integrate_range(f, g, 0.0, 0.3) + integrate_range(f, g, 0.3, 0.7) + integrate_range(f, g, 0.7, 1.0);
  CHECK(parts == doctest::Approx(whole).epsilon(1e-14));
  CHECK(integrate_interval([](double r) { return std::exp(-r); }, 0.0, 1.0, 4, 64, 10) ==
        doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("adapted grid keeps requested breaks as panel edges") {
  AdaptedGridSpec s;
  s.dim = 6;
  s.min_radius = 1e-9;
  s.breaks = {1e-5, 0.25, 0.5};
  const RadialGrid g = build_adapted_grid(s);
  for (double b : s.breaks) {
    bool found = false;
    for (double e : g.breaks()) found = found || std::abs(e - b) <= 1e-15 * std::max(1.0, b);
    CHECK(found);
  }
  CHECK(g.breaks().front() == 0.0);
  CHECK(g.radius() == 1.0);
  for (std::size_t i = 0; i + 1 < g.breaks().size(); ++i) CHECK(g.breaks()[i] < g.breaks()[i + 1]);
  CHECK(g.panel_of(0.3) < g.panel_of(0.6));
  CHECK(g.panel_of(1.0) == g.panel_count() - 1);
}

TEST_CASE("half-line integral of a Gaussian in three dimensions") {
  auto gauss = [](double r) { return std::exp(-r * r); };
  CHECK(integrate_halfline(gauss, 1.0, 3) == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-7));
  HalflineOptions fine;
  fine.panels = 96;
  fine.order = 12;
  CHECK(integrate_halfline(gauss, 1.0, 3, fine) == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-13));
  CHECK_THROWS_AS(integrate_halfline([](double) { return 1.0; }, 1.0, 3), std::domain_error);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(integrate_interval([](double) { return 1.0; }, 1.0, 0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(integrate_halfline([](double) { return 0.0; }, -1.0, 3), std::invalid_argument);
}

}
