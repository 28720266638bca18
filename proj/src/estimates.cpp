#include "lognodal/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lognodal/error.hpp"

namespace lognodal {

namespace {

bool passes_gates(const ShootingResult& r, std::string& why) {
  for (double g : r.nehari_residual_per_domain)
    if (!(std::abs(g) <= 1e-6)) {
      why = "per-domain Nehari residual above 1e-6";
      return false;
    }
  if (!(r.ode_residual <= 1e-6)) {
    why = "ODE residual above 1e-6";
    return false;
  }
  return true;
}

} // namespace

Level nodal_level(const Params& params, int k, const LevelOptions& options) {
  params.validate();
  if (k < 1) throw std::invalid_argument("nodal_level: k must be at least 1");
  Level lv;
  lv.k = k;
  std::string shoot_error, glue_error;
  std::optional<ShootingResult> shot;
  try {
    ShootingResult r = shoot_k(params, k, 1, options.shoot);
    std::string why;
    if (passes_gates(r, why)) {
      shot = std::move(r);
    } else {
      shoot_error = "shooting solution rejected: " + why;
    }
  } catch (const SolverError& e) {
    shoot_error = e.what();
  }
  if (shot) {
    lv.shoot_energy = shot->energy;
    if (options.refine_check) {
      ShootOptions fine = options.shoot;
      fine.ivp.rtol /= 10.0;
      fine.ivp.atol /= 10.0;
      fine.a_hint = shot->initial_value;
      fine.window_decades = 1.0;
      try {
        lv.spread = std::abs(shoot_k(params, k, 1, fine).energy - shot->energy);
      } catch (const SolverError& e) {
        lv.notes.push_back(std::string("tolerance refinement failed: ") + e.what());
        lv.spread = std::abs(shot->energy);
      }
    }
  } else {
    lv.notes.push_back(shoot_error);
  }
  const bool run_glue =
      k >= 2 && (options.glue_mode == GlueMode::always || (options.glue_mode == GlueMode::warm && shot));
  std::optional<GluedSolution> glued;
  if (run_glue) {
    auto init = shot ? shot->node_radii : equal_volume_nodes(k, params.radius, params.dim);
    try {
      GlueOptions go = options.glue;
      go.shoot = options.shoot;
      glued = optimize_nodes(params, k, init, go);
      lv.glue_energy = glued->total_energy;
    } catch (const SolverError& e) {
      glue_error = e.what();
      lv.notes.push_back(glue_error);
    }
  }
  if (!shot && !glued)
    throw SolverError("nodal_level: no solution with " + std::to_string(k) + " nodal domains",
                      shoot_error + (glue_error.empty() ? "" : "\n" + glue_error));
  if (shot && (!glued || shot->energy <= glued->total_energy)) {
    lv.value = shot->energy;
    lv.method = "shoot";
    lv.nodes = shot->node_radii;
  } else {
    lv.value = glued->total_energy;
    lv.method = "glue";
    lv.nodes = glued->nodes;
  }
  if (shot) lv.solution = std::move(shot);
  return lv;
}

Level ground_level(const Params& params, const LevelOptions& options) {
  LevelOptions o = options;
  o.glue_mode = GlueMode::off;
  Level lv = nodal_level(params, 1, o);
  if (!(lv.value > 0.0)) lv.notes.push_back("ground level is not positive");
  return lv;
}

namespace {

GapCheck make_gap(std::string name, double lower, double upper, double spreads, int dim) {
  GapCheck g;
  g.name = std::move(name);
  const double s = sobolev_level(dim) / dim;
  g.margin = lower + s - upper;
  g.uncertainty = spreads + kLevelResolution * std::max({std::abs(lower), std::abs(upper), s});
  g.verified = g.margin > g.uncertainty;
  if (g.margin > 0.0 && !g.verified) g.notes.push_back("positive margin below the numerical resolution");
  return g;
}

} // namespace

GapCheck gap_check_bc(const Level& ground, const Level& two_domain, int dim) {
  if (ground.k != 1 || two_domain.k != 2) throw std::invalid_argument("gap_check_bc: need the levels for k = 1 and 2");
  GapCheck g = make_gap("bc-gap", ground.value, two_domain.value, ground.spread + two_domain.spread, dim);
  if (dim < 6) g.notes.push_back("outside paper-asserted regime (N < 6)");
  return g;
}

GapCheck gap_check_bc(const Params& params, const LevelOptions& options) {
  return gap_check_bc(ground_level(params, options), nodal_level(params, 2, options), params.dim);
}

GapCheck gap_check_nodal(const Level& lower, const Level& upper, int dim) {
  if (upper.k != lower.k + 1) throw std::invalid_argument("gap_check_nodal: levels must be for k and k + 1");
  GapCheck g = make_gap("nodal-gap-" + std::to_string(lower.k), lower.value, upper.value, lower.spread + upper.spread,
                        dim);
  if (dim < 6) g.notes.push_back("outside paper-asserted regime (N < 6)");
  return g;
}

GapCheck gap_check_nodal(const Params& params, int k, const LevelOptions& options) {
  const Level lower = k == 1 ? ground_level(params, options) : nodal_level(params, k, options);
  return gap_check_nodal(lower, nodal_level(params, k + 1, options), params.dim);
}

std::vector<double> default_schedule(int dim, int count) {
  if (dim < 3 || count < 1) throw std::invalid_argument("default_schedule: need dim >= 3 and count >= 1");
  const double crit = 2.0 * dim / (dim - 2.0);
  std::vector<double> out;
  for (int n = 0; n < count; ++n) out.push_back(crit - 0.5 * std::ldexp(1.0, -n));
  return out;
}

ContinuationReport continuation(const Params& params, int k, const std::vector<double>& schedule,
                                double critical_level, const ShootOptions& options) {
  params.validate();
  if (schedule.empty()) throw std::invalid_argument("continuation: empty schedule");
  const double crit = params.critical_exponent();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 2.0) || schedule[i] > crit) throw std::invalid_argument("continuation: p outside (2, 2*]");
    if (i > 0 && !(schedule[i] > schedule[i - 1])) throw std::invalid_argument("continuation: schedule must increase");
  }
  ContinuationReport rep;
  rep.k = k;
  rep.critical_level = critical_level;
  std::optional<double> prev_a;
  for (double p : schedule) {
    Params q = params;
    q.exponent = p;
    ShootOptions so = options;
    if (prev_a) so.a_hint = *prev_a;
    try {
      ShootingResult r = shoot_k(q, k, 1, so);
      for (double g : r.nehari_residual_per_domain)
        if (!(std::abs(g) <= 1e-6)) throw SolverError("per-domain Nehari residual above 1e-6");
      prev_a = r.initial_value;
      const double e = r.energy;
      rep.trace.push_back({p, e, std::move(r)});
    } catch (const SolverError& e) {
      rep.lost_at = p;
      rep.failure = e.what();
      break;
    }
  }
  rep.tracked = rep.trace.size() == schedule.size();
  if (!rep.trace.empty()) {
    rep.final_gap = std::abs(rep.trace.back().level - critical_level) / std::abs(critical_level);
    const std::size_t from = rep.trace.size() > 3 ? rep.trace.size() - 3 : 0;
    rep.tail_max = rep.trace[from].level;
    for (std::size_t i = from; i < rep.trace.size(); ++i) rep.tail_max = std::max(rep.tail_max, rep.trace[i].level);
  }
  rep.converged = rep.tracked && rep.final_gap <= 1e-2;
  rep.limsup_ok = rep.tracked && rep.tail_max <= critical_level + 0.01 * std::abs(critical_level);
  return rep;
}

ContinuationReport continuation(const Params& params, int k, const std::vector<double>& schedule,
                                const ShootOptions& options) {
  Params c = params;
  c.exponent = c.critical_exponent();
  const double level = shoot_k(c, k, 1, options).energy;
  return continuation(params, k, schedule, level, options);
}

double logsobolev_check(const RadialFn& u, double a, const Params& params) {
  if (!(a > 0.0)) throw std::invalid_argument("logsobolev_check: a must be positive");
  const IntegralTerms t = integral_terms(u, 2.0);
  if (!(t.mass > 1e-300)) throw std::invalid_argument("logsobolev_check: function is numerically zero");
  const double N = params.dim;
  return a / std::numbers::pi * t.grad + (std::log(t.mass) - N * (1.0 + std::log(a))) * t.mass - t.log_mass;
}

std::vector<RadialFn> random_radial_functions(int count, unsigned seed, const Params& params) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double R = params.radius;
  std::vector<RadialFn> out;
  for (int n = 0; n < count; ++n) {
    struct Term {
      double c, q, m, s;
    };
    std::vector<Term> terms(1 + rng() % 3);
    double s_min = R;
    for (auto& t : terms) {
      t.c = (unit() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, 4.0 * unit() - 2.0);
      t.q = 1.0 + static_cast<double>(rng() % 3);
      t.m = 3.0 * unit();
      t.s = R * std::pow(10.0, -2.5 * unit());
      s_min = std::min(s_min, t.s);
    }
    AdaptedGridSpec g;
    g.dim = params.dim;
    g.radius = R;
    g.min_radius = 1e-3 * s_min;
    g.order = 10;
    g.ratio = 1.2;
    auto grid = std::make_shared<const RadialGrid>(build_adapted_grid(g));
    out.push_back(RadialFn::sample(grid, [terms, R](double r) {
      const double x = r / R, x2 = 1.0 - x * x;
      double v = 0.0, d = 0.0;
      for (const auto& t : terms) {
        const double z = 1.0 + (r / t.s) * (r / t.s);
        const double a = std::pow(x2, t.q), b = std::pow(z, -t.m);
        const double da = -2.0 * t.q * x / R * std::pow(x2, t.q - 1.0);
        const double db = -2.0 * t.m * r / (t.s * t.s) * std::pow(z, -t.m - 1.0);
        v += t.c * a * b;
        d += t.c * (da * b + a * db);
      }
      return std::array<double, 2>{v, d};
    }));
  }
  return out;
}

namespace {

using Eval = std::function<std::array<double, 2>(double)>;

Eval combination(const RadialFn& ug, const BubbleSpec& bs, double alpha, double beta) {
  return [&ug, bs, alpha, beta](double r) {
    const auto u = ug.at(r);
    const auto p = psi_eps_at(bs, r);
    return std::array<double, 2>{alpha * u[0] + beta * p[0], alpha * u[1] + beta * p[1]};
  };
}

// Outermost sign change of w inside (0, 2 rho); nullopt when w keeps one sign.
std::optional<double> node_of(const Eval& w, double eps, double rho) {
  double hi = 2.0 * rho;
  double whi = w(hi)[0];
  for (double lo = hi / 1.2; lo > 1e-3 * eps; lo /= 1.2) {
    const double wlo = w(lo)[0];
    if ((wlo > 0.0) != (whi > 0.0) && wlo != 0.0) {
      double a = lo, b = hi;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double m = 0.5 * (a + b);
        ((w(m)[0] > 0.0) == (wlo > 0.0) ? a : b) = m;
      }
      return 0.5 * (a + b);
    }
    hi = lo;
    whi = wlo;
  }
  return std::nullopt;
}

std::shared_ptr<const RadialGrid> mixed_grid(const Params& params, double eps, double rho,
                                             std::vector<double> breaks) {
  AdaptedGridSpec gs;
  gs.dim = params.dim;
  gs.radius = params.radius;
  gs.min_radius = 1e-4 * eps;
  breaks.push_back(rho);
  breaks.push_back(2.0 * rho);
  gs.breaks = breaks;
  gs.order = 10;
  gs.ratio = 1.2;
  return std::make_shared<const RadialGrid>(build_adapted_grid(gs));
}

double sum_power(const RadialFn& f, double q) {
  auto w = f.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f.values[i]), q);
  return s;
}

} // namespace

CrossTermReport cross_term_check(double alpha, double beta, const std::vector<double>& eps_list,
                                 const RadialFn& ground_state, const Params& params, double rho) {
  if (!(alpha > 0.0) || !(beta < 0.0)) throw std::invalid_argument("cross_term_check: need alpha > 0 > beta");
  if (eps_list.size() < 5) throw std::invalid_argument("cross_term_check: need at least 5 eps values");
  if (2.0 * rho > params.radius * (1.0 + 1e-12))
    throw std::invalid_argument("cross_term_check: cutoff support exceeds the ball");
  CrossTermReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  const double crit = params.critical_exponent();
  const double m = 0.5 * (params.dim - 2);
  for (double eps : eps_list) {
    BubbleSpec bs{eps, rho, params.dim};
    bs.validate();
    const Eval w = combination(ground_state, bs, alpha, beta);
    std::vector<double> br;
    if (auto z = node_of(w, eps, rho)) br.push_back(*z);
    auto grid = mixed_grid(params, eps, rho, br);
    const RadialFn W = RadialFn::sample(grid, w);
    const RadialFn U = RadialFn::sample(grid, [&](double r) {
      auto u = ground_state.at(r);
      return std::array<double, 2>{alpha * u[0], alpha * u[1]};
    });
    const RadialFn P = RadialFn::sample(grid, [&](double r) {
      auto p = psi_eps_at(bs, r);
      return std::array<double, 2>{beta * p[0], beta * p[1]};
    });
    rep.eps.push_back(eps);
    rep.d5.push_back(std::abs(sum_power(W, crit) - sum_power(U, crit) - sum_power(P, crit)));
    const double split = integral_terms(U, crit).log_mass + integral_terms(P, crit).log_mass;
    rep.d6.push_back(split - integral_terms(W, crit).log_mass);
  }
  rep.d5_fit = fit_power_law(rep.eps, rep.d5, false);
  rep.es5_ok = rep.d5_fit.exponent >= m - 0.3;
  // Calibrate the constant on the coarse half and require it on every eps.
  std::vector<std::size_t> order(rep.eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rep.eps[a] > rep.eps[b]; });
  for (std::size_t j = 0; j < (order.size() + 1) / 2; ++j) {
    const std::size_t i = order[j];
    rep.d6_constant = std::max(rep.d6_constant, rep.d6[i] / std::pow(rep.eps[i], m));
  }
  rep.es6_ok = true;
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    const bool ok = rep.d6[i] <= 2.0 * rep.d6_constant * std::pow(rep.eps[i], m);
    rep.d6_within.push_back(ok);
    rep.es6_ok = rep.es6_ok && ok;
  }
  return rep;
}

namespace {

struct PairState {
  std::array<double, 2> psi{};
  double node = 0.0;
  RadialFn w;
};

PairState pair_residual(const Params& params, const RadialFn& ug, const BubbleSpec& bs, double alpha, double beta) {
  const Eval w = combination(ug, bs, alpha, beta);
  const auto z = node_of(w, bs.eps, bs.rho);
  if (!z) throw SolverError("miranda_project: alpha u_g + beta psi_eps does not change sign");
  PairState st;
  st.node = *z;
  st.w = RadialFn::sample(mixed_grid(params, bs.eps, bs.rho, {*z}), w);
  const double R = params.radius;
  // Near the centre the bubble dominates, so w < 0 on [0, node).
  const IntegralTerms neg = integral_terms(st.w, params.exponent, 0.0, *z);
  const IntegralTerms pos = integral_terms(st.w, params.exponent, *z, R);
  st.psi = {nehari_from_terms(pos, params) / pos.grad, nehari_from_terms(neg, params) / neg.grad};
  return st;
}

} // namespace

MirandaResult miranda_project(const Params& params, const RadialFn& ground_state, double ground, double eps,
                              double rho) {
  params.validate();
  BubbleSpec bs{eps, rho, params.dim};
  bs.validate();
  MirandaResult res;
  res.eps = eps;
  double alpha = 1.0, beta = -1.0;
  const double target = 1e-12;
  PairState st = pair_residual(params, ground_state, bs, alpha, beta);
  auto size = [](const std::array<double, 2>& v) { return std::max(std::abs(v[0]), std::abs(v[1])); };
  bool converged = size(st.psi) <= target;
  for (int it = 0; it < 50 && !converged; ++it) {
    res.iterations = it + 1;
    const double ha = 1e-7 * alpha, hb = 1e-7 * std::abs(beta);
    const PairState sa = pair_residual(params, ground_state, bs, alpha + ha, beta);
    const PairState sb = pair_residual(params, ground_state, bs, alpha, beta + hb);
    const double j11 = (sa.psi[0] - st.psi[0]) / ha, j21 = (sa.psi[1] - st.psi[1]) / ha;
    const double j12 = (sb.psi[0] - st.psi[0]) / hb, j22 = (sb.psi[1] - st.psi[1]) / hb;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0 || !std::isfinite(det)) break;
    double da = -(j22 * st.psi[0] - j12 * st.psi[1]) / det;
    double db = -(-j21 * st.psi[0] + j11 * st.psi[1]) / det;
    while (alpha + da <= 0.0 || beta + db >= 0.0) {
      da *= 0.5;
      db *= 0.5;
    }
    PairState next;
    bool improved = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      try {
        next = pair_residual(params, ground_state, bs, alpha + t * da, beta + t * db);
      } catch (const SolverError&) {
        continue;
      }
      if (size(next.psi) < size(st.psi)) {
        alpha += t * da;
        beta += t * db;
        st = std::move(next);
        improved = true;
        break;
      }
    }
    if (!improved) break;
    converged = size(st.psi) <= target;
  }
  if (!converged) {
    // Alternating one-dimensional bisections: psi_1 changes sign along alpha,
    // psi_2 along beta.
    res.used_fallback = true;
    auto solve_1d = [&](bool along_alpha) {
      double x = along_alpha ? alpha : -beta;
      const std::size_t comp = along_alpha ? 0 : 1;
      auto f = [&](double v) {
        return along_alpha ? pair_residual(params, ground_state, bs, v, beta).psi[comp]
                           : pair_residual(params, ground_state, bs, alpha, -v).psi[comp];
      };
      double lo = x / 2.0, hi = x * 2.0;
      double flo = f(lo), fhi = f(hi);
      for (int e = 0; e < 40 && (flo > 0.0) == (fhi > 0.0); ++e) {
        lo /= 2.0;
        hi *= 2.0;
        flo = f(lo);
        fhi = f(hi);
      }
      if ((flo > 0.0) == (fhi > 0.0)) throw SolverError("miranda_project: fallback could not bracket");
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) lo = mid, flo = fm;
        else hi = mid;
      }
      x = 0.5 * (lo + hi);
      if (along_alpha) alpha = x;
      else beta = -x;
    };
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
      solve_1d(true);
      solve_1d(false);
      st = pair_residual(params, ground_state, bs, alpha, beta);
      converged = size(st.psi) <= 1e-10;
    }
    if (!converged) throw SolverError("miranda_project: Newton and bisection fallback both stalled");
  }
  res.alpha = alpha;
  res.beta = beta;
  res.residual_pos = st.psi[0];
  res.residual_neg = st.psi[1];
  res.node = st.node;
  res.energy = energy(st.w, params);
  res.threshold = ground + sobolev_level(params.dim) / params.dim;
  res.below_threshold = res.energy < res.threshold;
  return res;
}

EnergyReport energy_report(const Params& params, int k_max, const LevelOptions& options) {
  params.validate();
  if (k_max < 1) throw std::invalid_argument("energy_report: k_max must be at least 1");
  EnergyReport rep;
  rep.params = params;
  rep.sobolev_term = sobolev_level(params.dim) / params.dim;
  for (int k = 1; k <= k_max + 1; ++k) {
    try {
      rep.nodal_levels[k] = k == 1 ? ground_level(params, options) : nodal_level(params, k, options);
    } catch (const SolverError& e) {
      rep.failures[k] = e.what();
    }
  }
  if (!rep.nodal_levels.count(1)) throw SolverError("energy_report: no ground state", rep.failures[1]);
  rep.ground_level = rep.nodal_levels[1].value;
  if (rep.nodal_levels.count(2)) {
    rep.sign_changing_level = rep.nodal_levels[2].value;
    rep.gaps["bc-gap"] = gap_check_bc(rep.nodal_levels[1], rep.nodal_levels[2], params.dim);
  }
  for (int k = 1; k <= k_max; ++k)
    if (rep.nodal_levels.count(k) && rep.nodal_levels.count(k + 1)) {
      auto g = gap_check_nodal(rep.nodal_levels[k], rep.nodal_levels[k + 1], params.dim);
      rep.gaps[g.name] = g;
    }
  return rep;
}

} // namespace lognodal
