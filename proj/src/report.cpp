#include "lognodal/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace lognodal {

using nlohmann::json;

Params RunConfig::params() const {
  Params p;
  p.dim = dim;
  p.lambda = lambda;
  p.theta = theta;
  p.radius = radius;
  p.exponent = exponent ? *exponent : p.critical_exponent();
  return p;
}

IvpOptions RunConfig::ivp() const {
  IvpOptions o = IvpOptions::defaults();
  // LOGNODAL_TOL wins over the file value.
  if (o.rtol == IvpOptions{}.rtol) o.rtol = rtol;
  o.atol = atol;
  return o;
}

std::vector<double> RunConfig::eps_list() const { return eps.empty() ? default_eps_list(rho) : eps; }

std::vector<double> RunConfig::p_schedule() const { return schedule.empty() ? default_schedule(dim) : schedule; }

void RunConfig::validate() const {
  params().validate();
  if (k < 1) throw std::invalid_argument("config: k must be at least 1");
  if (sign != 1 && sign != -1) throw std::invalid_argument("config: sign must be +1 or -1");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("config: tolerances must be positive");
  if (!(rho > 0.0) || 2.0 * rho > radius) throw std::invalid_argument("config: need 0 < 2 rho <= R");
  if (continuation_k < 1) throw std::invalid_argument("config: continuation k must be at least 1");
  if (k_max < 1) throw std::invalid_argument("config: k_max must be at least 1");
  if (!(logsob_a > 0.0)) throw std::invalid_argument("config: logsob_a must be positive");
  if (logsob_samples < 1) throw std::invalid_argument("config: logsob_samples must be positive");
  if (format != "csv" && format != "json") throw std::invalid_argument("config: format must be csv or json");
  if (jobs < 1) throw std::invalid_argument("config: jobs must be positive");
  static const std::set<std::string> axes{"theta", "lambda", "eps", "p"};
  if (!axes.count(axis)) throw std::invalid_argument("config: unknown sweep axis " + axis);
  if (!init_nodes.empty() && init_nodes.size() != static_cast<std::size_t>(k - 1))
    throw std::invalid_argument("config: init_nodes needs k - 1 entries");
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"params", {{"dim", c.dim}, {"lambda", c.lambda}, {"theta", c.theta}, {"radius", c.radius}}},
           {"solve", {{"k", c.k}, {"sign", c.sign}, {"glue", c.glue}, {"init_nodes", c.init_nodes}}},
           {"tolerance", {{"rtol", c.rtol}, {"atol", c.atol}}},
           {"bubbles", {{"rho", c.rho}, {"eps", c.eps}}},
           {"continuation", {{"k", c.continuation_k}, {"schedule", c.schedule}}},
           {"verify",
            {{"k_max", c.k_max},
             {"logsob_a", c.logsob_a},
             {"logsob_samples", c.logsob_samples},
             {"seed", c.seed},
             {"alpha", c.alpha},
             {"beta", c.beta}}},
           {"sweep", {{"axis", c.axis}, {"values", c.values}, {"quantity", c.quantity}}},
           {"output", {{"dir", c.out}, {"format", c.format}, {"plot", c.plot}, {"jobs", c.jobs}}}};
  if (c.exponent) j["params"]["exponent"] = *c.exponent;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw std::invalid_argument("config: unknown key " + where + "." + it.key());
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

void from_json(const json& j, RunConfig& c) {
  check_keys(j, {"params", "solve", "tolerance", "bubbles", "continuation", "verify", "sweep", "output"}, "root");
  try {
    if (j.contains("params")) {
      const auto& p = j.at("params");
      check_keys(p, {"dim", "lambda", "theta", "exponent", "radius"}, "params");
      read(p, "dim", c.dim);
      read(p, "lambda", c.lambda);
      read(p, "theta", c.theta);
      read(p, "radius", c.radius);
      if (p.contains("exponent")) c.exponent = p.at("exponent").get<double>();
    }
    if (j.contains("solve")) {
      const auto& s = j.at("solve");
      check_keys(s, {"k", "sign", "glue", "init_nodes"}, "solve");
      read(s, "k", c.k);
      read(s, "sign", c.sign);
      read(s, "glue", c.glue);
      read(s, "init_nodes", c.init_nodes);
    }
    if (j.contains("tolerance")) {
      const auto& t = j.at("tolerance");
      check_keys(t, {"rtol", "atol"}, "tolerance");
      read(t, "rtol", c.rtol);
      read(t, "atol", c.atol);
    }
    if (j.contains("bubbles")) {
      const auto& b = j.at("bubbles");
      check_keys(b, {"rho", "eps"}, "bubbles");
      read(b, "rho", c.rho);
      read(b, "eps", c.eps);
    }
    if (j.contains("continuation")) {
      const auto& t = j.at("continuation");
      check_keys(t, {"k", "schedule"}, "continuation");
      read(t, "k", c.continuation_k);
      read(t, "schedule", c.schedule);
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      check_keys(v, {"k_max", "logsob_a", "logsob_samples", "seed", "alpha", "beta"}, "verify");
      read(v, "k_max", c.k_max);
      read(v, "logsob_a", c.logsob_a);
      read(v, "logsob_samples", c.logsob_samples);
      read(v, "seed", c.seed);
      read(v, "alpha", c.alpha);
      read(v, "beta", c.beta);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      check_keys(s, {"axis", "values", "quantity"}, "sweep");
      read(s, "axis", c.axis);
      read(s, "values", c.values);
      read(s, "quantity", c.quantity);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      check_keys(o, {"dir", "format", "plot", "jobs"}, "output");
      read(o, "dir", c.out);
      read(o, "format", c.format);
      read(o, "plot", c.plot);
      read(o, "jobs", c.jobs);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  RunConfig c = j.get<RunConfig>();
  c.validate();
  return c;
}

namespace {

std::ostream& precise(std::ostream& os) { return os << std::setprecision(17); }

} // namespace

void write_profile_csv(std::ostream& os, const RadialFn& u) {
  precise(os) << "r,u,du\n";
  auto pts = u.grid->points();
  for (std::size_t i = 0; i < pts.size(); ++i) os << pts[i] << "," << u.values[i] << "," << u.derivs[i] << "\n";
  const double R = u.grid->radius();
  const auto end = u.at(R);
  os << R << "," << end[0] << "," << end[1] << "\n";
}

json profile_json(const RadialFn& u) {
  json j;
  std::vector<double> r(u.grid->points().begin(), u.grid->points().end());
  j["r"] = r;
  j["u"] = u.values;
  j["du"] = u.derivs;
  return j;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  precise(os) << "axis,value,status\n";
  for (const auto& r : rows) {
    os << r.axis << ",";
    if (std::isfinite(r.value)) os << r.value;
    else os << "nan";
    os << "," << r.status << "\n";
  }
}

json params_json(const Params& p) {
  return {{"dim", p.dim}, {"lambda", p.lambda}, {"theta", p.theta}, {"exponent", p.exponent}, {"radius", p.radius}};
}

json summary_json(const ShootingResult& r, const Params& p, int k, int sign) {
  json j;
  j["params"] = params_json(p);
  j["k"] = k;
  j["sign"] = sign;
  j["initial_value"] = r.initial_value;
  j["nodal_domains"] = r.nodal_domains;
  j["node_radii"] = r.node_radii;
  j["energy"] = r.energy;
  j["reduced_energy"] = reduced_energy(r.solution, p);
  j["ode_residual"] = r.ode_residual;
  j["nehari_residual_total"] = r.nehari_residual_total;
  j["nehari_residual_per_domain"] = r.nehari_residual_per_domain;
  j["boundary_value"] = r.boundary_value;
  json bands = json::array();
  for (const auto& b : r.bands) bands.push_back({{"a", b.a}, {"energy", b.energy}});
  j["bands"] = bands;
  return j;
}

json glue_json(const GluedSolution& g, const Params& p, int k) {
  json j;
  j["params"] = params_json(p);
  j["k"] = k;
  j["sign"] = g.leading_sign;
  j["nodes"] = g.nodes;
  j["total_energy"] = g.total_energy;
  j["mismatches"] = g.mismatches;
  j["max_slope"] = g.max_slope;
  j["evaluations"] = g.evaluations;
  json comps = json::array();
  for (const auto& c : g.components)
    comps.push_back({{"energy", c.energy}, {"ode_residual", c.ode_residual}, {"boundary_value", c.boundary_value}});
  j["components"] = comps;
  json minima = json::array();
  for (const auto& [n, e] : g.local_minima) minima.push_back({{"nodes", n}, {"energy", e}});
  j["local_minima"] = minima;
  return j;
}

json fit_json(const AsymptoticFit& f) {
  json s = json::array();
  for (const auto& [x, y] : f.samples) s.push_back({x, y});
  return {{"exponent", f.exponent},   {"coefficient", f.coefficient}, {"r_squared", f.r_squared},
          {"eps_min", f.eps_min},     {"eps_max", f.eps_max},         {"log_corrected", f.log_corrected},
          {"samples", s}};
}

json gap_json(const GapCheck& g) {
  return {{"name", g.name},
          {"margin", g.margin},
          {"uncertainty", g.uncertainty},
          {"verified", g.verified},
          {"notes", g.notes}};
}

json level_json(const Level& l) {
  json j{{"k", l.k}, {"value", l.value}, {"method", l.method}, {"spread", l.spread}, {"nodes", l.nodes},
         {"notes", l.notes}};
  j["shoot_energy"] = l.shoot_energy ? json(*l.shoot_energy) : json(nullptr);
  j["glue_energy"] = l.glue_energy ? json(*l.glue_energy) : json(nullptr);
  return j;
}

json report_json(const EnergyReport& r) {
  json j;
  j["params"] = params_json(r.params);
  j["ground_level"] = r.ground_level;
  j["sign_changing_level"] = r.sign_changing_level ? json(*r.sign_changing_level) : json(nullptr);
  j["sign_changing_level_note"] = "radial two-domain level B_2, an upper bound for B";
  j["sobolev_term"] = r.sobolev_term;
  json levels = json::object();
  for (const auto& [k, l] : r.nodal_levels) levels[std::to_string(k)] = level_json(l);
  j["nodal_levels"] = levels;
  json fails = json::object();
  for (const auto& [k, f] : r.failures) fails[std::to_string(k)] = f;
  j["failures"] = fails;
  json gaps = json::object();
  for (const auto& [n, g] : r.gaps) gaps[n] = gap_json(g);
  j["gaps"] = gaps;
  if (r.params.dim < 6) j["banner"] = "outside paper-asserted regime";
  return j;
}

json continuation_json(const ContinuationReport& r) {
  json trace = json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"p", t.p},
                     {"level", t.level},
                     {"initial_value", t.solution.initial_value},
                     {"node_radii", t.solution.node_radii},
                     {"nehari_residual_per_domain", t.solution.nehari_residual_per_domain},
                     {"ode_residual", t.solution.ode_residual}});
  json j{{"k", r.k},
         {"trace", trace},
         {"critical_level", r.critical_level},
         {"tracked", r.tracked},
         {"final_gap", r.final_gap},
         {"tail_max", r.tail_max},
         {"converged", r.converged},
         {"limsup_ok", r.limsup_ok}};
  j["lost_at"] = r.lost_at ? json(*r.lost_at) : json(nullptr);
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

json cross_term_json(const CrossTermReport& r) {
  std::vector<int> within(r.d6_within.begin(), r.d6_within.end());
  return {{"alpha", r.alpha},          {"beta", r.beta},   {"eps", r.eps},         {"d5", r.d5},
          {"d6", r.d6},                {"d5_fit", fit_json(r.d5_fit)},            {"d6_constant", r.d6_constant},
          {"d6_within", within},       {"es5_ok", r.es5_ok}, {"es6_ok", r.es6_ok}};
}

json miranda_json(const MirandaResult& m) {
  return {{"eps", m.eps},
          {"alpha", m.alpha},
          {"beta", m.beta},
          {"residual_pos", m.residual_pos},
          {"residual_neg", m.residual_neg},
          {"node", m.node},
          {"energy", m.energy},
          {"threshold", m.threshold},
          {"below_threshold", m.below_threshold},
          {"iterations", m.iterations},
          {"used_fallback", m.used_fallback}};
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace

std::string svg_plot(const std::vector<PlotSeries>& series, const std::vector<double>& marks, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel) {
  const double W = 640, H = 400, L = 70, Rm = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x0 = 0.0, x1 = 1.0;
  if (!(y1 > y0)) y0 -= 1.0, y1 += 1.0;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - Rm); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream s;
  s << std::setprecision(6);
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(title) << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xv << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << yv << "</text>\n";
  }
  if (y0 < 0.0 && y1 > 0.0)
    s << "<line x1=\"" << L << "\" y1=\"" << py(0.0) << "\" x2=\"" << W - Rm << "\" y2=\"" << py(0.0)
      << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  for (double m : marks)
    if (m >= x0 && m <= x1)
      s << "<line x1=\"" << px(m) << "\" y1=\"" << T << "\" x2=\"" << px(m) << "\" y2=\"" << H - B
        << "\" stroke=\"#cc3333\" stroke-width=\"1\"/>\n";
  static const char* colours[] = {"#1f5fa8", "#2a8a3a", "#a8591f", "#7a2aa8"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    s << "<polyline fill=\"none\" stroke=\"" << colours[k % 4] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i)
      if (std::isfinite(ser.x[i]) && std::isfinite(ser.y[i])) s << px(ser.x[i]) << "," << py(ser.y[i]) << " ";
    s << "\"/>\n";
    if (!ser.label.empty())
      s << "<text x=\"" << W - Rm - 4 << "\" y=\"" << T + 14 * (k + 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << colours[k % 4] << "\">"
        << escape(ser.label) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"12\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">" << escape(ylabel) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

} // namespace lognodal
