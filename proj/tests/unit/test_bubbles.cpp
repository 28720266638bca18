#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lognodal/bubbles.hpp"

using namespace lognodal;
using std::numbers::pi;

namespace {

// int U_1^{2*} over R^N = c^{2*} omega_{N-1} B(N/2, N/2) / 2 with c = [N(N-2)]^{(N-2)/4}.
double sobolev_by_beta(int n) {
  const double c = std::pow(n * (n - 2.0), 0.25 * (n - 2));
  const double crit = 2.0 * n / (n - 2.0);
  const double omega = 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
  const double beta = std::tgamma(0.5 * n) * std::tgamma(0.5 * n) / std::tgamma(double(n));
  return std::pow(c, crit) * omega * 0.5 * beta;
}

} // namespace

TEST_SUITE("bubbles") {

TEST_CASE("bubble values") {
  CHECK(bubble_value(1.0, 0.0, 6) == doctest::Approx(24.0));
  CHECK(bubble_value(1.0, 1.0, 6) == doctest::Approx(6.0));
  CHECK(bubble_value(0.5, 0.0, 6) == doctest::Approx(96.0));
  CHECK(bubble_scale_for_height(96.0, 6) == doctest::Approx(0.5));
  CHECK(bubble_value(1e-200, 1e-300, 6) > 0.0);
  for (double r : {0.01, 0.4, 3.0}) {
    const double h = 1e-6 * r;
    const double fd = (bubble_value(0.3, r + h, 6) - bubble_value(0.3, r - h, 6)) / (2 * h);
    CHECK(bubble_derivative(0.3, r, 6) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("Sobolev level against the Beta-function oracle") {
  for (int n : {3, 4, 5, 6, 8}) {
    CHECK(sobolev_level(n) == doctest::Approx(sobolev_by_beta(n)).epsilon(1e-10));
    CHECK(sobolev_level_closed_form(n) == doctest::Approx(sobolev_by_beta(n)).epsilon(1e-12));
  }
  CHECK(sobolev_level(6) / 6.0 == doctest::Approx(1190.6410245235).epsilon(1e-12));
}

TEST_CASE("bubble identity is scale invariant") {
  for (double eps : {0.1, 1.0, 10.0}) {
    const auto b = bubble_identity(eps, 6);
    CHECK(b.mismatch <= 1e-8);
    CHECK(b.grad_sq == doctest::Approx(sobolev_level(6)).epsilon(1e-10));
  }
}

TEST_CASE("cutoff is a C2 step") {
  const double rho = 0.25;
  CHECK(cutoff(0.1, rho) == 1.0);
  CHECK(cutoff(0.6, rho) == 0.0);
  CHECK(cutoff(1.5 * rho, rho) == doctest::Approx(0.5));
  CHECK(cutoff_derivative(rho, rho) == doctest::Approx(0.0));
  CHECK(cutoff_derivative(2 * rho, rho) == doctest::Approx(0.0));
  for (double r = rho; r <= 2 * rho; r += 0.01) {
    CHECK(cutoff(r, rho) >= 0.0);
    CHECK(cutoff(r, rho) <= 1.0);
    CHECK(cutoff_derivative(r, rho) <= 0.0);
  }
}

TEST_CASE("cut-off bubble equals the bubble inside rho and vanishes past 2 rho") {
  BubbleSpec s;
  s.eps = 0.01;
  for (double r : {0.0, 0.05, 0.2}) CHECK(psi_eps_at(s, r)[0] == doctest::Approx(bubble_value(0.01, r, 6)));
  CHECK(psi_eps_at(s, 0.6)[0] == 0.0);
  s.rho = -1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("power-law fit recovers an exact power") {
  std::vector<double> x, y;
  for (int k = 0; k < 7; ++k) {
    x.push_back(std::ldexp(1.0, -k));
    y.push_back(3.0 * std::pow(x.back(), 2.5));
  }
  const auto f = fit_power_law(x, y, false);
  CHECK(f.exponent == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.coefficient == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_power_law({1, 2}, {1, 2}, false), std::invalid_argument);
}

TEST_CASE("quantity names round trip") {
  for (auto q : {BubbleQuantity::grad_sq_defect, BubbleQuantity::crit_norm_defect, BubbleQuantity::l2_norm,
                 BubbleQuantity::l1_norm, BubbleQuantity::crit_minus_one_norm, BubbleQuantity::log_moment})
    CHECK(parse_bubble_quantity(to_string(q)) == q);
  CHECK_THROWS_AS(parse_bubble_quantity("nope"), std::invalid_argument);
}

TEST_CASE("L2 norm of the cut-off bubble approaches eps^2 int U_1^2") {
  BubbleSpec s;
  s.eps = std::ldexp(0.25, -10);
  auto grid = sweep_grid(s, s.eps, 1.0);
  const double v = bubble_quantity(BubbleQuantity::l2_norm, s, *grid);
  CHECK(v / (s.eps * s.eps) == doctest::Approx(96.0 * pi * pi * pi).epsilon(1e-3));
}

TEST_CASE("default sweep passes every fit") {
  const auto v = verify_bubbles(6, 0.25, default_eps_list(0.25));
  CHECK(v.identities_ok);
  CHECK(v.exponents_ok);
  CHECK(v.log_moment.passed);
  CHECK(v.log_moment.c1 == doctest::Approx(384.0 * pi * pi * pi).epsilon(0.01));
}

}
