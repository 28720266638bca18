#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lognodal/estimates.hpp"

using namespace lognodal;
using std::numbers::pi;

namespace {

Level fake_level(int k, double value, double spread = 0.0) {
  Level l;
  l.k = k;
  l.value = value;
  l.spread = spread;
  return l;
}

} // namespace

TEST_SUITE("estimates") {

TEST_CASE("p-schedule approaches the critical exponent") {
  const auto s = default_schedule(6);
  REQUIRE(s.size() == 9);
  CHECK(s.front() == 2.5);
  CHECK(s.back() == doctest::Approx(3.0 - 0.5 / 256.0).epsilon(1e-15));
  for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(s[i] < s[i + 1]);
}

TEST_CASE("gap arithmetic and verdict") {
  const double third = sobolev_level(6) / 6.0;
  const GapCheck g = gap_check_bc(fake_level(1, 900.0), fake_level(2, 2000.0, 1e-3), 6);
  CHECK(g.name == "bc-gap");
  CHECK(g.margin == doctest::Approx(900.0 + third - 2000.0));
  CHECK(g.uncertainty >= 1e-3);
  CHECK(g.verified == (g.margin > g.uncertainty));
  const GapCheck tight = gap_check_nodal(fake_level(2, 2000.0), fake_level(3, 2000.0 + third), 6);
  CHECK(tight.name == "nodal-gap-2");
  CHECK_FALSE(tight.verified);
  const GapCheck low = gap_check_nodal(fake_level(1, 100.0), fake_level(2, 150.0), 5);
  CHECK_FALSE(low.notes.empty());
}

TEST_CASE("log-Sobolev margin of a Gaussian matches its closed form") {
  // For u = exp(-c r^2) on R^N: margin / |u|_2^2 = N (a c / pi + log(pi / (2c)) / 2 - 1/2 - log a).
  Params p;
  p.radius = 9.0;
  auto grid = std::make_shared<const RadialGrid>(build_grid(9.0, 60, 12, 6));
  for (double a : {0.5, pi / 2, 3.0})
    for (double c : {0.5, 1.0, 2.0}) {
      const RadialFn g = RadialFn::sample(grid, [c](double r) {
        const double e = std::exp(-c * r * r);
        return std::array<double, 2>{e, -2.0 * c * r * e};
      });
      const double mass = integral_terms(g, 2.0).mass;
      const double closed = 6.0 * (a * c / pi + 0.5 * std::log(pi / (2.0 * c)) - 0.5 - std::log(a));
      CHECK(logsobolev_check(g, a, p) / mass == doctest::Approx(closed).epsilon(1e-9));
    }
}

TEST_CASE("log-Sobolev margin is non-negative on the unit ball for dilated Gaussians") {
  Params p;
  auto grid = std::make_shared<const RadialGrid>(build_grid(1.0, 40, 12, 6));
  for (double c : {0.25, 1.0, 4.0, 16.0, 64.0}) {
    const RadialFn g = RadialFn::sample(grid, [c](double r) {
      const double e = std::exp(-c * r * r);
      return std::array<double, 2>{e - std::exp(-c), -2.0 * c * r * e};
    });
    CHECK(logsobolev_check(g, pi / 2, p) >= 0.0);
  }
}

TEST_CASE("log-Sobolev margin is non-negative on seeded random functions") {
  Params p;
  const auto fs = random_radial_functions(100, 7, p);
  REQUIRE(fs.size() == 100);
  for (const auto& u : fs) CHECK(logsobolev_check(u, pi / 2, p) >= 0.0);
  const auto again = random_radial_functions(3, 7, p);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].values == fs[i].values);
}

TEST_CASE("log-Sobolev margin is invariant under scaling by a constant") {
  Params p;
  const auto fs = random_radial_functions(5, 11, p);
  for (const auto& u : fs) {
    const double m = logsobolev_check(u, pi / 2, p);
    const double mass = integral_terms(u, 2.0).mass;
    CHECK(logsobolev_check(u.scaled(3.0), pi / 2, p) == doctest::Approx(9.0 * m).epsilon(1e-9 * mass / std::max(std::abs(m), 1e-300) + 1e-9));
  }
}

TEST_CASE("ground level matches the frozen shooting energy") {
  Params p;
  const Level g = ground_level(p);
  CHECK(g.value == doctest::Approx(919.858697092545).epsilon(1e-10));
  CHECK(g.spread < 1e-7 * g.value);
}

TEST_CASE("cross-term estimates on the ground state") {
  Params p;
  const Level g = ground_level(p);
  const auto eps = default_eps_list(0.25);
  const CrossTermReport r = cross_term_check(1.0, -1.0, eps, g.solution->solution, p, 0.25);
  CHECK(r.d5.size() == eps.size());
  CHECK(r.d5_fit.exponent >= 1.7);
  CHECK(r.es5_ok);
  CHECK(r.es6_ok);
  for (bool w : r.d6_within) CHECK(w);
}

TEST_CASE("Miranda projection puts both sign parts on the Nehari set") {
  Params p;
  const Level g = ground_level(p);
  const MirandaResult m = miranda_project(p, g.solution->solution, g.value, std::ldexp(0.25, -6), 0.25);
  CHECK(m.alpha > 0.0);
  CHECK(m.beta < 0.0);
  CHECK(std::abs(m.residual_pos) <= 1e-8);
  CHECK(std::abs(m.residual_neg) <= 1e-8);
  CHECK(m.threshold == doctest::Approx(g.value + sobolev_level(6) / 6.0));
  CHECK(m.energy > g.value);
}

TEST_CASE("subcritical continuation point reproduces shooting") {
  Params p;
  const auto rep = continuation(p, 1, {2.5, 2.75}, 919.858697092545);
  REQUIRE(rep.trace.size() == 2);
  Params q = p;
  q.exponent = 2.75;
  CHECK(rep.trace[1].level == doctest::Approx(shoot_k(q, 1, 1).energy).epsilon(1e-9));
  CHECK(rep.trace[0].level > rep.trace[1].level);
}

}
