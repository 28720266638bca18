#include "lognodal/glue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "lognodal/error.hpp"

namespace lognodal {

ShootingResult annulus_positive_solution(const Params& params, double r_lo, double r_hi,
                                         const ShootOptions& options) {
  if (!(r_lo >= 0.0) || !(r_hi > r_lo) || r_hi > params.radius * (1.0 + 1e-12))
    throw std::invalid_argument("annulus_positive_solution: need 0 <= r_lo < r_hi <= R");
  Params local = params;
  local.radius = r_hi;
  if (r_lo == 0.0) return shoot_k(local, 1, 1, options);
  return shoot_annulus(local, r_lo, options);
}

RadialFn assemble_glued(const std::vector<RadialFn>& components, const std::vector<double>& nodes, int leading_sign) {
  if (components.empty() || components.size() != nodes.size() + 1)
    throw std::invalid_argument("assemble_glued: need one component more than interior nodes");
  if (leading_sign != 1 && leading_sign != -1) throw std::invalid_argument("assemble_glued: sign must be +1 or -1");
  const std::size_t k = components.size();
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), nodes.begin(), nodes.end());
  edges.push_back(components.back().grid->radius());
  for (std::size_t j = 0; j + 1 < edges.size(); ++j)
    if (!(edges[j + 1] > edges[j])) throw std::invalid_argument("assemble_glued: nodes must increase inside (0, R)");
  std::vector<double> signs(k);
  for (std::size_t j = 0; j < k; ++j) signs[j] = (j % 2 == 0 ? 1.0 : -1.0) * leading_sign;

  std::vector<double> breaks;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& c = components[j];
    if (std::abs(c.grid->radius() - edges[j + 1]) > 1e-12 * edges[j + 1])
      throw std::invalid_argument("assemble_glued: component grid does not end at its node");
    double peak = 1.0;
    for (double v : c.values) peak = std::max(peak, std::abs(v));
    const double tol = 1e-9 * peak;
    if (std::abs(c.at(edges[j + 1])[0]) > tol || (j > 0 && std::abs(c.at(edges[j])[0]) > tol)) {
      std::ostringstream msg;
      msg << "assemble_glued: component " << j + 1 << " does not vanish at its endpoints";
      throw std::invalid_argument(msg.str());
    }
    for (double b : c.grid->breaks())
      if (b >= edges[j] && b <= edges[j + 1]) breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.front() != 0.0) breaks.insert(breaks.begin(), 0.0);
  auto grid = std::make_shared<const RadialGrid>(components.front().grid->dim(), breaks, components.front().grid->order());

  auto eval = [components, edges, signs](double r) {
    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, r);
    const std::size_t j = static_cast<std::size_t>(it - (edges.begin() + 1));
    auto [u, du] = components[j].at(r);
    return std::array<double, 2>{signs[j] * u, signs[j] * du};
  };
  return RadialFn::sample(grid, eval);
}

std::vector<double> derivative_mismatch(const GluedSolution& glued) {
  std::vector<double> out;
  for (std::size_t j = 0; j < glued.nodes.size(); ++j) {
    const double r = glued.nodes[j];
    const double left = glued.components[j].trajectory->eval(r)[1];
    const double right = glued.components[j + 1].trajectory->initial_slope();
    // Adjacent components enter with opposite signs.
    out.push_back(std::abs(left + right));
  }
  return out;
}

std::vector<double> equal_volume_nodes(int k, double R, int dim) {
  if (k < 1) throw std::invalid_argument("equal_volume_nodes: k must be at least 1");
  std::vector<double> out;
  for (int j = 1; j < k; ++j) out.push_back(R * std::pow(static_cast<double>(j) / k, 1.0 / dim));
  return out;
}

namespace {

struct Evaluation {
  bool ok = false;
  double energy = std::numeric_limits<double>::infinity();
  std::vector<ShootingResult> components;
  /// (left + right) / (|left| + |right|) per node.
  std::vector<double> signed_mismatch;
};

class NodeProblem {
public:
  NodeProblem(const Params& params, int k, const GlueOptions& opts) : p_(params), k_(k), o_(opts) {}

  int evaluations = 0;

  bool admissible(const std::vector<double>& y) const {
    const double R = p_.radius, gap = o_.min_gap * R;
    double prev = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double r = std::exp(y[j]);
      if (!(r > 0.0) || (j > 0 && r - prev < gap)) return false;
      prev = r;
    }
    return R - prev >= gap;
  }

  Evaluation evaluate(const std::vector<double>& y) {
    if (auto it = cache_.find(y); it != cache_.end()) return it->second;
    Evaluation ev;
    if (!admissible(y)) return ev;
    ++evaluations;
    std::vector<double> edges{0.0};
    for (double v : y) edges.push_back(std::exp(v));
    edges.push_back(p_.radius);
    try {
      for (int j = 0; j < k_; ++j) {
        ShootOptions so = o_.shoot;
        if (hints_.count(j)) so.a_hint = hints_[j];
        ShootingResult c = annulus_positive_solution(p_, edges[j], edges[j + 1], so);
        hints_[j] = j == 0 ? c.initial_value : c.trajectory->initial_slope() * edges[j];
        ev.components.push_back(std::move(c));
      }
    } catch (const SolverError&) {
      cache_[y] = ev;
      return ev;
    }
    ev.ok = true;
    ev.energy = 0.0;
    for (const auto& c : ev.components) ev.energy += c.energy;
    for (int j = 0; j + 1 < k_; ++j) {
      const double r = edges[j + 1];
      const double left = ev.components[j].trajectory->eval(r)[1];
      const double right = ev.components[j + 1].trajectory->initial_slope();
      ev.signed_mismatch.push_back((left + right) / (std::abs(left) + std::abs(right)));
    }
    cache_[y] = ev;
    return ev;
  }

private:
  const Params& p_;
  int k_;
  const GlueOptions& o_;
  std::map<std::vector<double>, Evaluation> cache_;
  std::map<int, double> hints_;
};

std::vector<double> nelder_mead(NodeProblem& prob, std::vector<double> y0, const GlueOptions& o,
                                std::vector<std::vector<double>>& simplex_out) {
  const std::size_t n = y0.size();
  std::vector<std::vector<double>> s{y0};
  for (std::size_t i = 0; i < n; ++i) {
    auto y = y0;
    // Step toward the centre keeps the first trial admissible near R.
    y[i] -= 0.5;
    s.push_back(y);
  }
  auto f = [&](const std::vector<double>& y) { return prob.evaluate(y).energy; };
  std::vector<double> fs;
  for (auto& y : s) fs.push_back(f(y));
  const int budget = prob.evaluations + o.max_evaluations;
  while (prob.evaluations < budget) {
    std::vector<std::size_t> idx(s.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto i : idx) s2.push_back(s[i]), f2.push_back(fs[i]);
    s = s2;
    fs = f2;
    if (std::isfinite(fs.back()) && std::abs(fs.back() - fs.front()) <= o.energy_rtol * std::abs(fs.front())) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) c[d] += s[i][d] / n;
    auto along = [&](double t) {
      std::vector<double> y(n);
      for (std::size_t d = 0; d < n; ++d) y[d] = c[d] + t * (s[n][d] - c[d]);
      return y;
    };
    auto yr = along(-1.0);
    const double fr = f(yr);
    if (fr < fs[0]) {
      auto ye = along(-2.0);
      const double fe = f(ye);
      if (fe < fr) s[n] = ye, fs[n] = fe;
      else s[n] = yr, fs[n] = fr;
    } else if (fr < fs[n - 1]) {
      s[n] = yr, fs[n] = fr;
    } else {
      auto yc = fr < fs[n] ? along(-0.5) : along(0.5);
      const double fc = f(yc);
      if (fc < std::min(fr, fs[n])) {
        s[n] = yc, fs[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t d = 0; d < n; ++d) s[i][d] = s[0][d] + 0.5 * (s[i][d] - s[0][d]);
          fs[i] = f(s[i]);
        }
      }
    }
  }
  simplex_out = s;
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (fs[i] < fs[best]) best = i;
  return s[best];
}

double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Zero of the signed mismatch in log-node coordinates: secant/Illinois in one
// dimension, damped Newton with a difference Jacobian otherwise.
std::optional<std::vector<double>> polish(NodeProblem& prob, std::vector<double> y, const GlueOptions& o) {
  const std::size_t n = y.size();
  Evaluation ev = prob.evaluate(y);
  if (!ev.ok) return std::nullopt;
  const double target = 1e-10;
  const double max_step = 20.0;
  if (n == 1) {
    // Steps that leave the admissible set are halved.
    auto advance = [&](double from, double step, double& x, double& m) {
      for (int h = 0; h < 40; ++h, step *= 0.5) {
        Evaluation e = prob.evaluate({from + step});
        if (e.ok) {
          x = from + step;
          m = e.signed_mismatch[0];
          return true;
        }
      }
      return false;
    };
    double x0 = y[0], m0 = ev.signed_mismatch[0];
    double x1 = x0, m1 = m0;
    if (!advance(x0, -1e-3, x1, m1)) return std::nullopt;
    int it = 0;
    // Secant extrapolation until the sign flips.
    while ((m0 > 0.0) == (m1 > 0.0) && std::abs(m1) > target && it++ < o.polish_iterations) {
      double step = m1 != m0 ? -m1 * (x1 - x0) / (m1 - m0) : -(x1 - x0);
      if (!std::isfinite(step)) step = 2.0 * (x1 - x0);
      step = std::clamp(step, -max_step, max_step);
      double x = x1, m = m1;
      if (!advance(x1, step, x, m)) return std::nullopt;
      x0 = x1, m0 = m1;
      x1 = x, m1 = m;
    }
    if (std::abs(m1) <= target) return std::vector<double>{x1};
    if ((m0 > 0.0) == (m1 > 0.0)) return std::nullopt;
    int side = 0;
    for (; it < o.polish_iterations; ++it) {
      const double x = (x0 * m1 - x1 * m0) / (m1 - m0);
      Evaluation e = prob.evaluate({x});
      if (!e.ok) return std::nullopt;
      const double m = e.signed_mismatch[0];
      if (std::abs(m) <= target || std::abs(x1 - x0) < 1e-13 * std::max(1.0, std::abs(x))) return std::vector<double>{x};
      if ((m > 0.0) == (m1 > 0.0)) {
        x1 = x, m1 = m;
        if (side == 1) m0 *= 0.5;
        side = 1;
      } else {
        x0 = x, m0 = m;
        if (side == -1) m1 *= 0.5;
        side = -1;
      }
    }
    return std::vector<double>{std::abs(m0) < std::abs(m1) ? x0 : x1};
  }
  for (int it = 0; it < o.polish_iterations; ++it) {
    const auto& m = ev.signed_mismatch;
    if (norm_inf(m) <= target) return y;
    std::vector<std::vector<double>> J(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
      auto yp = y;
      yp[c] += 1e-4;
      Evaluation ep = prob.evaluate(yp);
      if (!ep.ok) return std::nullopt;
      for (std::size_t r = 0; r < n; ++r) J[r][c] = (ep.signed_mismatch[r] - m[r]) / 1e-4;
    }
    // Gaussian elimination with partial pivoting.
    std::vector<double> rhs(n);
    for (std::size_t r = 0; r < n; ++r) rhs[r] = -m[r];
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r)
        if (std::abs(J[r][c]) > std::abs(J[piv][c])) piv = r;
      std::swap(J[c], J[piv]);
      std::swap(rhs[c], rhs[piv]);
      if (J[c][c] == 0.0) return std::nullopt;
      for (std::size_t r = c + 1; r < n; ++r) {
        const double f = J[r][c] / J[c][c];
        for (std::size_t cc = c; cc < n; ++cc) J[r][cc] -= f * J[c][cc];
        rhs[r] -= f * rhs[c];
      }
    }
    std::vector<double> dy(n);
    for (std::size_t c = n; c-- > 0;) {
      double s = rhs[c];
      for (std::size_t cc = c + 1; cc < n; ++cc) s -= J[c][cc] * dy[cc];
      dy[c] = s / J[c][c];
    }
    const double scale = std::min(1.0, max_step / std::max(norm_inf(dy), 1e-300));
    bool accepted = false;
    for (double t = scale; t > 1e-4; t *= 0.5) {
      auto yt = y;
      for (std::size_t d = 0; d < n; ++d) yt[d] += t * dy[d];
      Evaluation et = prob.evaluate(yt);
      if (et.ok && norm_inf(et.signed_mismatch) < norm_inf(m)) {
        y = yt;
        ev = et;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return norm_inf(ev.signed_mismatch) <= target ? std::optional(y) : std::nullopt;
}

std::string describe(const std::vector<std::vector<double>>& simplex, NodeProblem& prob) {
  std::ostringstream s;
  s << "vertex,nodes,energy\n";
  for (std::size_t i = 0; i < simplex.size(); ++i) {
    s << i << ",";
    for (std::size_t d = 0; d < simplex[i].size(); ++d) s << (d ? ";" : "") << std::exp(simplex[i][d]);
    s << "," << prob.evaluate(simplex[i]).energy << "\n";
  }
  return s.str();
}

} // namespace

GluedSolution optimize_nodes(const Params& params, int k, const std::vector<double>& init_nodes,
                             const GlueOptions& options) {
  params.validate();
  if (k < 2) throw std::invalid_argument("optimize_nodes: k must be at least 2");
  if (init_nodes.size() != static_cast<std::size_t>(k - 1))
    throw std::invalid_argument("optimize_nodes: need k - 1 initial nodes");
  for (std::size_t j = 0; j < init_nodes.size(); ++j)
    if (!(init_nodes[j] > (j ? init_nodes[j - 1] : 0.0)) || !(init_nodes[j] < params.radius))
      throw std::invalid_argument("optimize_nodes: initial nodes must increase inside (0, R)");
  if (options.leading_sign != 1 && options.leading_sign != -1)
    throw std::invalid_argument("optimize_nodes: leading sign must be +1 or -1");

  NodeProblem prob(params, k, options);
  std::vector<std::vector<double>> starts{init_nodes};
  starts.insert(starts.end(), options.extra_starts.begin(), options.extra_starts.end());
  std::vector<std::pair<std::vector<double>, double>> minima;
  std::optional<std::vector<double>> best;
  double best_energy = std::numeric_limits<double>::infinity();
  std::string last_simplex;
  for (const auto& start : starts) {
    std::vector<double> y0;
    for (double r : start) y0.push_back(std::log(r));
    std::vector<std::vector<double>> simplex;
    auto y = nelder_mead(prob, y0, options, simplex);
    last_simplex = describe(simplex, prob);
    auto root = polish(prob, y, options);
    if (!root) continue;
    const Evaluation ev = prob.evaluate(*root);
    std::vector<double> nodes;
    for (double v : *root) nodes.push_back(std::exp(v));
    bool seen = false;
    for (const auto& [n, e] : minima) {
      double d = 0.0;
      for (std::size_t j = 0; j < n.size(); ++j) d = std::max(d, std::abs(n[j] - nodes[j]) / nodes[j]);
      seen = seen || d < 1e-6;
    }
    if (!seen) minima.emplace_back(nodes, ev.energy);
    if (ev.energy < best_energy) {
      best_energy = ev.energy;
      best = *root;
    }
  }
  if (!best)
    throw SolverError("optimize_nodes: no node vector with matching derivatives for k = " + std::to_string(k),
                      last_simplex);

  const Evaluation ev = prob.evaluate(*best);
  GluedSolution g;
  g.leading_sign = options.leading_sign;
  for (double v : *best) g.nodes.push_back(std::exp(v));
  g.components = ev.components;
  std::vector<RadialFn> parts;
  for (const auto& c : g.components) parts.push_back(c.solution);
  g.solution = assemble_glued(parts, g.nodes, options.leading_sign);
  g.total_energy = ev.energy;
  g.mismatches = derivative_mismatch(g);
  for (double d : g.solution.derivs) g.max_slope = std::max(g.max_slope, std::abs(d));
  g.local_minima = minima;
  g.evaluations = prob.evaluations;
  for (double m : g.mismatches)
    if (m > options.mismatch_gate * g.max_slope)
      throw SolverError("optimize_nodes: derivative mismatch above the gate", last_simplex);
  return g;
}

} // namespace lognodal
