#include "lognodal/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "lognodal/bubbles.hpp"
#include "lognodal/error.hpp"

namespace lognodal {

std::string to_string(Termination t) {
  switch (t) {
  case Termination::reached_R: return "reached_R";
  case Termination::blow_up: return "blow_up";
  case Termination::step_failure: return "step_failure";
  }
  return "unknown";
}

IvpOptions IvpOptions::defaults() {
  IvpOptions o;
  if (const char* env = std::getenv("LOGNODAL_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0 && v < 1e-2) o.rtol = v;
  }
  return o;
}

std::array<double, 2> rhs(double r, double u, double v, const Params& params) {
  if (!(r > 0.0)) throw std::invalid_argument("rhs: r must be positive (use series_start at the centre)");
  return {v, -(params.dim - 1) / r * v - nonlinearity(u, params)};
}

std::array<double, 2> series_start(double a, const Params& params, double r0) {
  if (a == 0.0) throw std::invalid_argument("series_start: a must be non-zero");
  const double fa = nonlinearity(a, params);
  const int N = params.dim;
  return {a - fa / (2.0 * N) * r0 * r0, -fa / N * r0};
}

namespace {

// Dormand–Prince 5(4) tableau with Hairer's dense output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

using Vec2 = std::array<double, 2>;

} // namespace

class Integrator {
public:
  Integrator(const Params& params, const IvpOptions& opts, Trajectory& traj)
      : p_(params), o_(opts), t_(traj), N_(params.dim), q_(params.critical_exponent() - 1.0),
        crit_(params.is_critical()) {
    use_ref_ = o_.reference == ReferenceMode::on || (o_.reference == ReferenceMode::automatic && crit_);
  }

  void run_center(double a) {
    const double fa = nonlinearity(a, p_);
    const double ell = std::sqrt(std::abs(a / fa));
    double r0 = o_.r0 > 0.0 ? o_.r0 : std::min(1e-6 * p_.radius, 1e-4 * (std::isfinite(ell) ? ell : 1.0));
    t_.a_ = a;
    t_.fa_ = fa;
    t_.inner_ = 0.0;
    t_.core_scale_ = std::isfinite(ell) ? ell : 1.0;
    scale_ = std::max(1.0, std::abs(a));
    Vec2 y;
    if (use_ref_) {
      sigma_ = a > 0 ? 1.0 : -1.0;
      eps_ = bubble_scale_for_height(a, N_);
      t_.core_scale_ = eps_;
      // w = u - sigma U_eps has Taylor start driven by the non-bubble forcing.
      const double F0 = forcing(0.0, 0.0, bubble_value(eps_, 0.0, N_));
      y = {-F0 / (2.0 * N_) * r0 * r0, -F0 / N_ * r0};
    } else {
      sigma_ = 0.0;
      y = series_start(a, p_, r0);
    }
    march(r0, y, 1e-2 * r0);
  }

  void run_annulus(double r_lo, double b) {
    t_.inner_ = r_lo;
    t_.b_ = b;
    t_.core_scale_ = r_lo;
    scale_ = std::max(1.0, std::abs(b) * r_lo);
    sigma_ = 0.0;
    march(r_lo, {0.0, b}, 1e-4 * r_lo);
  }

private:
  const Params& p_;
  const IvpOptions& o_;
  Trajectory& t_;
  int N_;
  double q_;
  bool crit_;
  bool use_ref_ = false;
  double sigma_ = 0.0;
  double eps_ = 1.0;
  double scale_ = 1.0;

  // f(sigma U + w) - sigma U^{2*-1}.
  double forcing(double r, double w, double U) const {
    if (sigma_ == 0.0) return nonlinearity(w, p_);
    (void)r;
    const double u = sigma_ * U + w;
    double power;
    const double x = sigma_ * w / U;
    if (crit_ && std::abs(x) < 0.5) {
      power = sigma_ * std::pow(U, q_) * std::expm1(q_ * std::log1p(x));
    } else {
      const double au = std::abs(u);
      power = (au == 0.0 ? 0.0 : std::pow(au, p_.exponent - 2.0) * u) - sigma_ * std::pow(U, q_);
    }
    return power + p_.lambda * u + p_.theta * log_nonlinearity(u);
  }

  Vec2 deriv(double r, const Vec2& y) const {
    const double U = sigma_ == 0.0 ? 0.0 : bubble_value(eps_, r, N_);
    return {y[1], -(N_ - 1) / r * y[1] - forcing(r, y[0], U)};
  }

  Vec2 full(double r, const Vec2& y) const {
    if (sigma_ == 0.0) return y;
    return {sigma_ * bubble_value(eps_, r, N_) + y[0], sigma_ * bubble_derivative(eps_, r, N_) + y[1]};
  }

  bool maybe_refit(double r, Vec2& y) {
    if (!use_ref_) return false;
    const Vec2 u = full(r, y);
    if (u[0] == 0.0 || std::abs(r * u[1]) > 0.05 * std::abs(u[0])) return false;
    const double eps_new = bubble_scale_for_height(u[0], N_);
    if (r > eps_new / 16.0) return false;
    const double sig_new = u[0] > 0 ? 1.0 : -1.0;
    if (sigma_ == sig_new && eps_new > 0.5 * eps_ && eps_new < 2.0 * eps_) return false;
    sigma_ = sig_new;
    eps_ = eps_new;
    y = {u[0] - sigma_ * bubble_value(eps_, r, N_), u[1] - sigma_ * bubble_derivative(eps_, r, N_)};
    return true;
  }

  void march(double r, Vec2 y, double h) {
    const double R = t_.boundary;
    const double r_stop = R * (1.0 + o_.overshoot);
    t_.r_start = r;
    t_.termination = Termination::reached_R;
    Vec2 k1 = deriv(r, y);
    std::size_t steps = 0;
    while (r < r_stop) {
      if (++steps > o_.max_steps) {
        t_.termination = Termination::step_failure;
        break;
      }
      h = std::min(h, r);
      const double target = r < R ? R : r_stop;
      bool last = false;
      if (r + h >= target * (1.0 - 1e-15)) {
        h = target - r;
        last = true;
      }
      Vec2 ys, k2, k3, k4, k5, k6, k7, y1;
      for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * a21 * k1[i];
      k2 = deriv(r + c2 * h, ys);
      for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = deriv(r + c3 * h, ys);
      for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = deriv(r + c4 * h, ys);
      for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = deriv(r + c5 * h, ys);
      for (int i = 0; i < 2; ++i)
        ys[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      const double r1 = last ? target : r + h;
      k6 = deriv(r1, ys);
      for (int i = 0; i < 2; ++i)
        y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      k7 = deriv(r1, y1);
      double err = 0.0;
      bool finite = true;
      for (int i = 0; i < 2; ++i) {
        const double e =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = o_.atol + o_.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
        err += (e / sc) * (e / sc);
        finite = finite && std::isfinite(y1[i]) && std::isfinite(e);
      }
      err = std::sqrt(0.5 * err);
      if (!finite) err = 1e10;
      if (err <= 1.0) {
        Trajectory::Step s;
        s.r = r;
        s.h = h;
        s.sigma = sigma_;
        s.eps = eps_;
        for (int i = 0; i < 2; ++i) {
          const double ydiff = y1[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          s.rc[5 * i + 0] = y[i];
          s.rc[5 * i + 1] = ydiff;
          s.rc[5 * i + 2] = bspl;
          s.rc[5 * i + 3] = ydiff - h * k7[i] - bspl;
          s.rc[5 * i + 4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        t_.steps_.push_back(s);
        r = r1;
        y = y1;
        k1 = k7;
        const Vec2 u = full(r, y);
        if (!(std::abs(u[0]) <= o_.blowup_factor * scale_) || !std::isfinite(u[1])) {
          if (r < R) t_.termination = Termination::blow_up;
          break;
        }
        if (maybe_refit(r, y)) k1 = deriv(r, y);
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
        h *= std::clamp(fac, 0.2, 10.0);
      } else {
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        if (h < 1e-14 * r) {
          t_.termination = Termination::step_failure;
          break;
        }
      }
    }
    t_.r_end = r;
    last_ = full(r, y);
  }

public:
  Vec2 last_{};
};

std::array<double, 2> Trajectory::eval(double r) const {
  if (steps_.empty() || r < r_start) {
    if (inner_ == 0.0) {
      const double rr = std::max(r, 0.0);
      return {a_ - fa_ / (2.0 * dim) * rr * rr, -fa_ / dim * rr};
    }
    return {b_ * (r - inner_), b_};
  }
  r = std::min(r, r_end);
  auto it = std::upper_bound(steps_.begin(), steps_.end(), r, [](double x, const Step& s) { return x < s.r; });
  const Step& s = *(it == steps_.begin() ? it : it - 1);
  const double th = s.h > 0.0 ? (r - s.r) / s.h : 0.0;
  const double th1 = 1.0 - th;
  std::array<double, 2> y;
  for (int i = 0; i < 2; ++i) {
    const double* c = &s.rc[5 * i];
    y[i] = c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
  }
  if (s.sigma != 0.0) {
    y[0] += s.sigma * bubble_value(s.eps, r, dim);
    y[1] += s.sigma * bubble_derivative(s.eps, r, dim);
  }
  return y;
}

Trajectory integrate_ivp(double a, const Params& params, const IvpOptions& options) {
  params.validate();
  if (a == 0.0 || !std::isfinite(a)) throw std::invalid_argument("integrate_ivp: a must be finite and non-zero");
  Trajectory t;
  t.boundary = params.radius;
  t.dim = params.dim;
  Integrator integ(params, options, t);
  integ.run_center(a);
  return t;
}

Trajectory integrate_annulus_ivp(double r_lo, double b, const Params& params, const IvpOptions& options) {
  params.validate();
  if (!(r_lo > 0.0) || r_lo >= params.radius)
    throw std::invalid_argument("integrate_annulus_ivp: need 0 < r_lo < R");
  if (b == 0.0 || !std::isfinite(b)) throw std::invalid_argument("integrate_annulus_ivp: slope must be non-zero");
  Trajectory t;
  t.boundary = params.radius;
  t.dim = params.dim;
  Integrator integ(params, options, t);
  integ.run_annulus(r_lo, b);
  return t;
}

NodeCount count_nodal_domains(const Trajectory& traj, double R) {
  if (traj.termination != Termination::reached_R || traj.r_end < R * (1.0 - 1e-14))
    throw std::invalid_argument("count_nodal_domains: trajectory did not reach R");
  std::vector<double> rs;
  const auto& steps = traj.steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (s.r >= R) break;
    if (i > 0 || traj.inner() == 0.0) rs.push_back(s.r);
    const double mid = s.r + 0.5 * s.h;
    if (mid < R) rs.push_back(mid);
  }
  NodeCount out;
  double prev_r = 0.0, prev_u = 0.0;
  bool have = false;
  for (double r : rs) {
    const double u = traj.eval(r)[0];
    if (u == 0.0) continue;
    if (have && (u > 0.0) != (prev_u > 0.0)) {
      double lo = prev_r, hi = r;
      const bool lo_pos = prev_u > 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double um = traj.eval(mid)[0];
        if (um == 0.0) {
          lo = hi = mid;
          break;
        }
        ((um > 0.0) == lo_pos ? lo : hi) = mid;
      }
      const double z = 0.5 * (lo + hi);
      const double slope = traj.eval(z)[1];
      if (std::abs(slope) < 1e-9) {
        std::ostringstream msg;
        msg << "count_nodal_domains: tangential zero at r = " << z;
        throw SolverError(msg.str());
      }
      out.nodes.push_back(z);
    }
    prev_r = r;
    prev_u = u;
    have = true;
  }
  // Sign change between the last sample and R itself.
  const double uR = traj.eval(R)[0];
  if (have && uR != 0.0 && (uR > 0.0) != (prev_u > 0.0)) {
    double lo = prev_r, hi = R;
    const bool lo_pos = prev_u > 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double um = traj.eval(mid)[0];
      if (um == 0.0) {
        lo = hi = mid;
        break;
      }
      ((um > 0.0) == lo_pos ? lo : hi) = mid;
    }
    out.nodes.push_back(0.5 * (lo + hi));
  }
  out.nodal_domains = static_cast<int>(out.nodes.size()) + 1;
  return out;
}

double ode_residual(const RadialFn& u, const Params& params) {
  const int N = params.dim;
  auto pts = u.grid->points();
  const double r_max = u.grid->radius();
  double worst = 0.0;
  auto flux = [&](double r) { return std::pow(r, N - 1) * u.at(r)[1]; };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = pts[i];
    double h = 1e-2 * r;
    // u log u^2 is not smooth at u = 0, so the stencil must not reach a zero.
    if (u.derivs[i] != 0.0) h = std::min(h, 3e-2 * std::abs(u.values[i] / u.derivs[i]));
    if (!u.dense) h = std::min(h, 0.25 * (r_max - r));
    if (!(h > 0.0)) continue;
    const double d = (-flux(r + 2 * h) + 8 * flux(r + h) - 8 * flux(r - h) + flux(r - 2 * h)) / (12 * h);
    const double rf = std::pow(r, N - 1) * nonlinearity(u.values[i], params);
    worst = std::max(worst, std::abs(d + rf) / (1.0 + std::abs(rf)));
  }
  return worst;
}

ShootingResult package_solution(std::shared_ptr<const Trajectory> traj, const Params& params) {
  const double R = params.radius;
  NodeCount nc = count_nodal_domains(*traj, R);
  std::vector<double> nodes;
  for (double z : nc.nodes)
    if (z < R * (1.0 - 1e-8)) nodes.push_back(z);
  AdaptedGridSpec gs;
  gs.dim = params.dim;
  gs.radius = R;
  gs.min_radius = std::min(1e-3 * traj->core_scale(), 1e-3 * R);
  if (traj->inner() > 0.0) gs.min_radius = std::min(gs.min_radius, 1e-3 * traj->inner());
  gs.breaks = nodes;
  if (traj->inner() > 0.0) gs.breaks.push_back(traj->inner());
  auto grid = std::make_shared<const RadialGrid>(build_adapted_grid(gs));
  const double inner = traj->inner();
  auto eval = [traj, inner](double r) {
    if (r <= inner) return std::array<double, 2>{0.0, 0.0};
    return traj->eval(r);
  };
  ShootingResult res;
  res.solution = RadialFn::sample(grid, eval);
  res.trajectory = traj;
  res.initial_value = traj->initial_value();
  res.node_radii = nodes;
  res.nodal_domains = static_cast<int>(nodes.size()) + 1;
  res.boundary_value = traj->eval(R)[0];
  auto terms = integral_terms(res.solution, params.exponent);
  res.energy = energy_from_terms(terms, params);
  res.nehari_residual_total = nehari_from_terms(terms, params) / terms.grad;
  std::vector<double> edges{inner};
  edges.insert(edges.end(), nodes.begin(), nodes.end());
  edges.push_back(R);
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    auto t = integral_terms(res.solution, params.exponent, edges[j], edges[j + 1]);
    res.nehari_residual_per_domain.push_back(t.grad > 0.0 ? nehari_from_terms(t, params) / t.grad : 0.0);
  }
  res.ode_residual = ode_residual(res.solution, params);
  return res;
}

namespace {

struct Probe {
  double x = 0.0;
  int c = -1;
  double uR = 0.0;
  Termination t = Termination::reached_R;
};

using Launch = std::function<Trajectory(double, const IvpOptions&)>;

class Shooter {
public:
  // `launch` maps the shooting amplitude (a > 0 or slope b > 0) to a run.
  Shooter(const Params& params, int k, int sign, const ShootOptions& opts, Launch launch)
      : p_(params), k_(k), sign_(sign), o_(opts), launch_(std::move(launch)) {}

  // Re-solves near x with the integrator tolerances of `ivp`; nullopt when no
  // bracket forms within a few widenings.
  std::optional<Probe> repolish(double x) {
    for (double w = 1e-7; w < 1e-2; w *= 10.0) {
      const double dx = w * std::max(1.0, std::abs(x));
      Probe A = probe(x - dx), B = probe(x + dx);
      const bool a_in = A.c == k_ - 1, b_in = B.c == k_ - 1;
      if (A.c < 0 || B.c < 0) continue;
      if (a_in && !b_in && B.c >= k_) return solve(A, B);
      if (b_in && !a_in && A.c >= k_) return solve(B, A);
    }
    return std::nullopt;
  }

  Probe probe(double x) {
    if (auto it = cache_.find(x); it != cache_.end()) return it->second;
    Probe pr;
    pr.x = x;
    Trajectory t = launch_(std::exp(x), o_.ivp);
    pr.t = t.termination;
    if (t.termination == Termination::reached_R) {
      pr.uR = t.eval(p_.radius)[0];
      try {
        pr.c = static_cast<int>(count_nodal_domains(t, p_.radius).nodes.size());
        // A zero exactly at R is not interior.
        if (pr.uR == 0.0) pr.c = std::max(pr.c - 1, 0);
      } catch (const SolverError&) {
        pr.c = -2;
      }
    }
    cache_[x] = pr;
    scan_.push_back({sign_ * std::exp(x), pr.c, pr.uR, pr.t});
    return pr;
  }

  // Signed boundary value, positive while the k-th domain has not closed.
  double g(const Probe& pr) const { return pr.uR * sign_ * ((k_ - 1) % 2 == 0 ? 1.0 : -1.0); }

  std::vector<std::pair<Probe, Probe>> scan(double x_lo, double x_hi) {
    std::vector<Probe> pts;
    const double dx = o_.decades_per_step * std::log(10.0);
    int beyond = 0;
    for (double x = x_lo; x <= x_hi + 1e-9; x += dx) {
      pts.push_back(probe(x));
      if (pts.back().c >= k_ + 1) {
        if (++beyond > static_cast<int>(4.0 / o_.decades_per_step)) break;
      } else {
        beyond = 0;
      }
    }
    std::vector<Probe> fine;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) refine(pts[i], pts[i + 1], 0, fine);
    if (!pts.empty()) fine.push_back(pts.back());
    std::vector<std::pair<Probe, Probe>> out;
    for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
      const auto &A = fine[i], &B = fine[i + 1];
      const bool a_in = A.c == k_ - 1, b_in = B.c == k_ - 1;
      if (A.c < 0 || B.c < 0 || a_in == b_in) continue;
      if (a_in && B.c >= k_) out.push_back({A, B});
      if (b_in && A.c >= k_) out.push_back({B, A});
    }
    return out;
  }

  // Drives the boundary value to zero inside a bracket whose `in` end has
  // k - 1 interior zeros.
  Probe solve(Probe in, Probe out) {
    double gi = g(in), go = g(out);
    int side = 0;
    for (int it = 0; it < 300; ++it) {
      if (std::abs(in.x - out.x) <= 4e-16 * std::max(1.0, std::abs(in.x))) break;
      double x;
      const bool secant_ok = gi > 0.0 && go < 0.0 && out.c == k_;
      if (secant_ok) {
        x = (in.x * go - out.x * gi) / (go - gi);
        const double lo = std::min(in.x, out.x), hi = std::max(in.x, out.x);
        const double w = hi - lo;
        if (!(x > lo + 1e-3 * w && x < hi - 1e-3 * w)) x = 0.5 * (in.x + out.x);
      } else {
        x = 0.5 * (in.x + out.x);
      }
      if (x == in.x || x == out.x) break;
      Probe pr = probe(x);
      int retries = 0;
      while (pr.c == -2 && retries++ < o_.max_retries) pr = probe(x + 1e-9 * retries * (out.x - in.x));
      if (pr.c == k_ - 1) {
        in = pr;
        gi = g(pr);
        if (side == -1) go *= 0.5;
        side = -1;
      } else {
        out = pr;
        go = pr.c == k_ ? g(pr) : -std::abs(go);
        if (side == 1) gi *= 0.5;
        side = 1;
      }
      if (g(pr) == 0.0) break;
    }
    if (out.c == k_ && std::abs(out.uR) < std::abs(in.uR)) return out;
    return in;
  }

  const std::vector<ScanEntry>& table() const { return scan_; }

private:
  const Params& p_;
  int k_;
  int sign_;
  const ShootOptions& o_;
  Launch launch_;
  std::map<double, Probe> cache_;
  std::vector<ScanEntry> scan_;

  void refine(const Probe& A, const Probe& B, int depth, std::vector<Probe>& out) {
    const bool anomaly = A.c < 0 || B.c < 0 || std::abs(A.c - B.c) > 1;
    if (!anomaly || depth >= 5) {
      out.push_back(A);
      return;
    }
    Probe M = probe(0.5 * (A.x + B.x));
    refine(A, M, depth + 1, out);
    refine(M, B, depth + 1, out);
  }
};

std::string format_scan(const std::vector<ScanEntry>& scan) {
  std::ostringstream s;
  s << "a,interior_zeros,u_R,termination\n";
  auto sorted = scan;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return std::abs(x.a) < std::abs(y.a); });
  for (const auto& e : sorted)
    s << e.a << "," << e.interior_zeros << "," << e.boundary_value << "," << to_string(e.termination) << "\n";
  return s.str();
}

ShootingResult shoot_with(const Params& params, int k, int sign, const ShootOptions& options, const Launch& launch,
                          const std::string& what) {
  if (!(options.a_min > 0.0) || !(options.a_max > options.a_min))
    throw std::invalid_argument(what + ": invalid scan range");
  Shooter sh(params, k, sign, options, launch);
  const double x_min = std::log(options.a_min), x_max = std::log(options.a_max);
  std::vector<std::pair<Probe, Probe>> brackets;
  if (options.a_hint) {
    const double xh = std::log(std::abs(*options.a_hint));
    const double w = options.window_decades * std::log(10.0);
    brackets = sh.scan(std::max(x_min, xh - w), std::min(x_max, xh + w));
  }
  if (brackets.empty()) brackets = sh.scan(x_min, x_max);
  if (brackets.empty())
    throw SolverError(what + ": no bracket for " + std::to_string(k) + " nodal domains in the scan range",
                      format_scan(sh.table()));
  if (options.first_band_only) brackets.resize(1);
  std::optional<ShootingResult> best;
  std::vector<Band> bands;
  for (auto& [in, out] : brackets) {
    Probe root = sh.solve(in, out);
    auto opts = options.ivp;
    if (options.polish_factor < 1.0) {
      ShootOptions fine = options;
      fine.ivp.rtol = std::max(options.ivp.rtol * options.polish_factor, 1e-13);
      fine.ivp.atol = options.ivp.atol * options.polish_factor;
      Shooter polisher(params, k, sign, fine, launch);
      if (auto p = polisher.repolish(root.x)) {
        root = *p;
        opts = fine.ivp;
      }
    }
    opts.overshoot = 0.05;
    auto traj = std::make_shared<const Trajectory>(launch(std::exp(root.x), opts));
    if (traj->termination != Termination::reached_R) continue;
    ShootingResult res;
    try {
      res = package_solution(traj, params);
    } catch (const SolverError&) {
      continue;
    }
    if (res.nodal_domains != k) continue;
    bands.push_back({std::exp(root.x), res.energy});
    if (!best || res.energy < best->energy) best = std::move(res);
  }
  if (!best)
    throw SolverError(what + ": brackets found but none converged to " + std::to_string(k) + " nodal domains",
                      format_scan(sh.table()));
  best->bands = bands;
  best->scan = sh.table();
  return *best;
}

} // namespace

ShootingResult shoot_k(const Params& params, int k, int sign, const ShootOptions& options) {
  params.validate();
  if (k < 1) throw std::invalid_argument("shoot_k: k must be at least 1");
  if (sign != 1 && sign != -1) throw std::invalid_argument("shoot_k: sign must be +1 or -1");
  auto launch = [&params, sign](double a, const IvpOptions& o) { return integrate_ivp(sign * a, params, o); };
  return shoot_with(params, k, sign, options, launch, "shoot_k");
}

ShootingResult shoot_annulus(const Params& params, double r_lo, const ShootOptions& options) {
  params.validate();
  if (!(r_lo > 0.0) || !(r_lo < params.radius)) throw std::invalid_argument("shoot_annulus: need 0 < r_lo < R");
  auto launch = [&params, r_lo](double s, const IvpOptions& o) {
    return integrate_annulus_ivp(r_lo, s / r_lo, params, o);
  };
  auto res = shoot_with(params, 1, 1, options, launch, "shoot_annulus");
  for (auto& b : res.bands) b.a /= r_lo;
  return res;
}

} // namespace lognodal
