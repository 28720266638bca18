// Acceptance suite: one PASS/FAIL line per criterion at N = 6, R = 1.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "lognodal/bubbles.hpp"
#include "lognodal/error.hpp"
#include "lognodal/estimates.hpp"
#include "lognodal/glue.hpp"
#include "lognodal/report.hpp"
#include "lognodal/shoot.hpp"

using namespace lognodal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Shared {
  Params params;
  std::map<std::pair<int, int>, ShootingResult> solutions;
  std::optional<Level> ground;
  std::vector<RadialFn> extra;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome bubble_identities() {
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (double eps : {0.1, 1.0, 10.0}) {
    const auto b = bubble_identity(eps, 6);
    o.pass = o.pass && b.mismatch <= 1e-8;
    d << "eps=" << eps << " mismatch=" << fmt("%.1e", b.mismatch) << "; ";
  }
  const double s = sobolev_level(6), closed = sobolev_level_closed_form(6);
  const double rel = std::abs(s - closed) / closed;
  o.pass = o.pass && rel <= 1e-6;
  d << "S^3 rel err=" << fmt("%.1e", rel);
  o.detail = d.str();
  return o;
}

Outcome bubble_exponents() {
  const auto v = verify_bubbles(6, 0.25, default_eps_list(0.25));
  std::ostringstream d;
  for (const auto& e : v.exponents)
    d << to_string(e.quantity) << "=" << fmt("%.3f", e.fit.exponent) << " (r2 " << fmt("%.5f", e.fit.r_squared)
      << (e.passed ? ")" : " out)") << "; ";
  d << "C1=" << fmt("%.1f", v.log_moment.c1) << " spread=" << fmt("%.2e", v.log_moment.spread)
    << " r2=" << fmt("%.5f", v.log_moment.fit.r_squared);
  return {v.exponents_ok && v.log_moment.passed, d.str()};
}

Outcome nodal_instances(Shared& sh) {
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (int k = 1; k <= 4; ++k) {
    std::optional<ShootingResult> pos, neg;
    bool ok = true;
    std::string why;
    try {
      pos = shoot_k(sh.params, k, 1);
      neg = shoot_k(sh.params, k, -1);
    } catch (const SolverError& e) {
      ok = false;
      why = e.what();
    }
    if (ok) {
      for (const auto* r : {&*pos, &*neg}) {
        ok = ok && r->nodal_domains == k && static_cast<int>(r->node_radii.size()) == k - 1;
        for (std::size_t j = 1; j < r->node_radii.size(); ++j) ok = ok && r->node_radii[j] > r->node_radii[j - 1];
        ok = ok && r->ode_residual <= 1e-6;
        for (double g : r->nehari_residual_per_domain) ok = ok && std::abs(g) <= 1e-6;
      }
      ok = ok && neg->initial_value < 0.0 && 0.0 < pos->initial_value;
      double peak = 0.0, diff = 0.0;
      auto pts = pos->solution.grid->points();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        peak = std::max(peak, std::abs(pos->solution.values[i]));
        diff = std::max(diff, std::abs(pos->solution.values[i] + neg->solution.at(pts[i])[0]));
      }
      ok = ok && diff <= 1e-8 * peak;
      d << "k=" << k << (ok ? " ok" : " FAILED") << " (ode " << fmt("%.1e", std::max(pos->ode_residual, neg->ode_residual))
        << ", symmetry " << fmt("%.1e", diff / peak) << "); ";
      sh.solutions[{k, 1}] = *pos;
      sh.solutions[{k, -1}] = *neg;
    } else {
      d << "k=" << k << " no solution: " << why << "; ";
    }
    o.pass = o.pass && ok;
  }
  o.detail = d.str();
  return o;
}

Outcome cross_method(Shared& sh) {
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (int k : {2, 3}) {
    auto it = sh.solutions.find({k, 1});
    if (it == sh.solutions.end()) {
      o.pass = false;
      d << "k=" << k << " no shooting solution to compare with; ";
      continue;
    }
    const ShootingResult& shot = it->second;
    try {
      const GluedSolution g = optimize_nodes(sh.params, k, equal_volume_nodes(k, sh.params.radius, 6));
      const double de = std::abs(g.total_energy - shot.energy) / shot.energy;
      double dn = 0.0, dm = 0.0;
      for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        dn = std::max(dn, std::abs(g.nodes[j] - shot.node_radii[j]) / shot.node_radii[j]);
        dm = std::max(dm, g.mismatches[j] / g.max_slope);
      }
      const bool ok = de <= 1e-4 && dn <= 1e-4 && dm <= 1e-5;
      o.pass = o.pass && ok;
      d << "k=" << k << " energy " << fmt("%.1e", de) << " nodes " << fmt("%.1e", dn) << " mismatch "
        << fmt("%.1e", dm) << (ok ? "; " : " FAILED; ");
      sh.extra.push_back(g.solution);
    } catch (const SolverError& e) {
      o.pass = false;
      d << "k=" << k << " glue failed: " << e.what() << "; ";
    }
  }
  o.detail = d.str();
  return o;
}

Outcome strict_gaps() {
  Outcome o;
  o.pass = true;
  int verified = 0, total = 0, missing = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::ostringstream d;
  for (double lambda : {-1.0, 0.0, 1.0})
    for (double theta : {0.5, 1.0, 2.0}) {
      const Params p = Params::critical(6, lambda, theta);
      std::ostringstream cell;
      cell << "(" << lambda << "," << theta << "):";
      try {
        const EnergyReport rep = energy_report(p, 3);
        for (const std::string name : {"bc-gap", "nodal-gap-1", "nodal-gap-2", "nodal-gap-3"}) {
          ++total;
          auto it = rep.gaps.find(name);
          if (it == rep.gaps.end()) {
            ++missing;
            cell << " " << name << "=n/a";
            continue;
          }
          verified += it->second.verified;
          worst = std::min(worst, it->second.margin);
          cell << " " << name << "=" << fmt("%.2e", it->second.margin);
        }
      } catch (const SolverError& e) {
        total += 4;
        missing += 4;
        cell << " " << e.what();
      }
      d << cell.str() << "; ";
    }
  o.pass = verified == total;
  o.detail = std::to_string(verified) + "/" + std::to_string(total) + " margins verified positive, " +
             std::to_string(missing) + " not computable; " + d.str();
  return o;
}

Outcome continuation_check(Shared& sh) {
  auto it = sh.solutions.find({2, 1});
  if (it == sh.solutions.end()) return {false, "no critical two-domain level"};
  const auto rep = continuation(sh.params, 2, default_schedule(6), it->second.energy);
  for (const auto& t : rep.trace) sh.extra.push_back(t.solution.solution);
  std::ostringstream d;
  d << "tracked=" << rep.tracked << " points=" << rep.trace.size() << " final gap=" << fmt("%.3e", rep.final_gap)
    << " tail max/B2=" << fmt("%.5f", rep.tail_max / rep.critical_level);
  if (!rep.failure.empty()) d << " failure: " << rep.failure;
  return {rep.tracked && rep.converged && rep.limsup_ok, d.str()};
}

Outcome logsobolev(Shared& sh) {
  const double a = std::numbers::pi / 2;
  double worst_random = std::numeric_limits<double>::infinity(), worst_solution = worst_random;
  for (const auto& u : random_radial_functions(100, 1, sh.params))
    worst_random = std::min(worst_random, logsobolev_check(u, a, sh.params));
  int count = 0;
  for (const auto& [key, r] : sh.solutions) {
    worst_solution = std::min(worst_solution, logsobolev_check(r.solution, a, sh.params));
    ++count;
  }
  for (const auto& u : sh.extra) {
    worst_solution = std::min(worst_solution, logsobolev_check(u, a, sh.params));
    ++count;
  }
  std::ostringstream d;
  d << "min margin random=" << fmt("%.3e", worst_random) << ", over " << count
    << " solutions=" << fmt("%.3e", worst_solution);
  return {worst_random >= 0.0 && worst_solution >= 0.0 && count > 0, d.str()};
}

Outcome cross_terms(Shared& sh) {
  if (!sh.ground) sh.ground = ground_level(sh.params);
  const auto r = cross_term_check(1.0, -1.0, default_eps_list(0.25), sh.ground->solution->solution, sh.params, 0.25);
  int within = 0;
  for (bool w : r.d6_within) within += w;
  std::ostringstream d;
  d << "es-5 exponent=" << fmt("%.3f", r.d5_fit.exponent) << " (r2 " << fmt("%.5f", r.d5_fit.r_squared)
    << "); es-6 holds at " << within << "/" << r.d6_within.size() << " eps";
  return {r.es5_ok && r.d5_fit.exponent >= 1.7 && r.es6_ok, d.str()};
}

Outcome miranda(Shared& sh) {
  if (!sh.ground) sh.ground = ground_level(sh.params);
  const auto eps = default_eps_list(0.25);
  const double e_min = *std::min_element(eps.begin(), eps.end());
  const auto m = miranda_project(sh.params, sh.ground->solution->solution, sh.ground->value, e_min, 0.25);
  const bool residuals = std::abs(m.residual_pos) <= 1e-8 && std::abs(m.residual_neg) <= 1e-8;
  std::ostringstream d;
  d << "eps=" << fmt("%.3e", e_min) << " residuals " << fmt("%.1e", m.residual_pos) << "/"
    << fmt("%.1e", m.residual_neg) << " L=" << fmt("%.6f", m.energy) << " threshold=" << fmt("%.6f", m.threshold)
    << " excess=" << fmt("%.3e", m.energy - m.threshold);
  return {residuals && m.below_threshold, d.str()};
}

Outcome determinism(Shared& sh) {
  std::ostringstream d;
  bool same = true;
  for (int k : {1, 2}) {
    const auto a = summary_json(shoot_k(sh.params, k, 1), sh.params, k, 1).dump();
    const auto b = summary_json(shoot_k(sh.params, k, 1), sh.params, k, 1).dump();
    same = same && a == b;
  }
  const auto b1 = verify_bubbles(6, 0.25, default_eps_list(0.25));
  const auto b2 = verify_bubbles(6, 0.25, default_eps_list(0.25));
  same = same && b1.log_moment.c1 == b2.log_moment.c1 && b1.exponents[0].fit.exponent == b2.exponents[0].fit.exponent;
  d << "repeat runs identical=" << same << "; ";

  ShootOptions tight;
  tight.ivp.rtol /= 10.0;
  tight.ivp.atol /= 10.0;
  double worst = 0.0;
  bool converged = true;
  for (int k = 1; k <= 4; ++k) {
    auto it = sh.solutions.find({k, 1});
    if (it == sh.solutions.end()) continue;
    ShootOptions o = tight;
    o.a_hint = it->second.initial_value;
    o.window_decades = 1.0;
    const double e = shoot_k(sh.params, k, 1, o).energy;
    const double rel = std::abs(e - it->second.energy) / it->second.energy;
    worst = std::max(worst, rel);
    converged = converged && rel <= 1e-7;
    d << "k=" << k << " level change " << fmt("%.1e", rel) << "; ";
  }
  return {same && converged, d.str()};
}

} // namespace

int main() {
  Shared sh;
  sh.params = Params::critical(6, 0.0, 1.0);
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "bubble identities", 1.0, [] { return bubble_identities(); }},
      {2, "bubble exponent fits", 30.0, [] { return bubble_exponents(); }},
      {3, "k = 1..4 radial solutions", 60.0, [&] { return nodal_instances(sh); }},
      {4, "glue vs shoot, k = 2, 3", 120.0, [&] { return cross_method(sh); }},
      {5, "strict energy gaps", 600.0, [] { return strict_gaps(); }},
      {6, "subcritical continuation", 60.0, [&] { return continuation_check(sh); }},
      {7, "log-Sobolev margins", 10.0, [&] { return logsobolev(sh); }},
      {8, "mixed-term estimates", 60.0, [&] { return cross_terms(sh); }},
      {9, "Miranda pair below threshold", 30.0, [&] { return miranda(sh); }},
      {10, "determinism and tolerance refinement", 1e300, [&] { return determinism(sh); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %-40s %s  [%.1f s%s] %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                in_time ? "" : ", over time limit", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
