#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "lognodal/bubbles.hpp"
#include "lognodal/error.hpp"
#include "lognodal/estimates.hpp"
#include "lognodal/glue.hpp"
#include "lognodal/report.hpp"
#include "lognodal/shoot.hpp"

namespace fs = std::filesystem;
using namespace lognodal;
using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 1, solver = 2, gate = 3 };

struct Flags {
  std::string config, out, format, sign, axis, quantity;
  bool plot = false;
  int jobs = 1, N = 6, k = 1, k_max = 3;
  double lambda = 0, theta = 1, p = 3, R = 1;
  std::vector<double> values;
  std::string check;
  std::multimap<std::string, CLI::Option*> opts;
};

void add_common(CLI::App* cmd, Flags& f) {
  f.opts.emplace("config", cmd->add_option("--config", f.config, "JSON config file"));
  f.opts.emplace("out", cmd->add_option("--out", f.out, "Output directory"));
  f.opts.emplace("format", cmd->add_option("--format", f.format, "csv or json"));
  f.opts.emplace("plot", cmd->add_flag("--plot", f.plot, "Write SVG plots"));
  f.opts.emplace("jobs", cmd->add_option("--jobs", f.jobs, "Worker threads for sweeps"));
  f.opts.emplace("N", cmd->add_option("--N", f.N, "Dimension"));
  f.opts.emplace("lambda", cmd->add_option("--lambda", f.lambda, "Linear coefficient"));
  f.opts.emplace("theta", cmd->add_option("--theta", f.theta, "Logarithmic coefficient"));
  f.opts.emplace("p", cmd->add_option("--p", f.p, "Power exponent (default critical)"));
  f.opts.emplace("R", cmd->add_option("--R", f.R, "Ball radius"));
  f.opts.emplace("k", cmd->add_option("--k", f.k, "Number of nodal domains"));
  f.opts.emplace("sign", cmd->add_option("--sign", f.sign, "Sign of u(0): + or -"));
}

int parse_sign(const std::string& s) {
  if (s == "+" || s == "1" || s == "+1" || s == "pos") return 1;
  if (s == "-" || s == "-1" || s == "neg") return -1;
  throw std::invalid_argument("sign must be + or -");
}

RunConfig build_config(Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  auto given = [&](const char* name) {
    auto [lo, hi] = f.opts.equal_range(name);
    for (auto it = lo; it != hi; ++it)
      if (it->second->count() > 0) return true;
    return false;
  };
  if (given("out")) c.out = f.out;
  if (given("format")) c.format = f.format;
  if (f.plot) c.plot = true;
  if (given("jobs")) c.jobs = f.jobs;
  if (given("N")) c.dim = f.N;
  if (given("lambda")) c.lambda = f.lambda;
  if (given("theta")) c.theta = f.theta;
  if (given("p")) c.exponent = f.p;
  if (given("R")) c.radius = f.R;
  if (given("k")) c.k = f.k;
  if (given("sign")) c.sign = parse_sign(f.sign);
  if (given("k-max")) c.k_max = f.k_max;
  if (given("axis")) c.axis = f.axis;
  if (given("quantity")) c.quantity = f.quantity;
  if (given("values")) c.values = f.values;
  c.validate();
  return c;
}

class Output {
public:
  explicit Output(const RunConfig& c) : dir_(c.out) {}
  void write(const std::string& name, const std::string& text) {
    fs::create_directories(dir_);
    std::ofstream o(dir_ / name, std::ios::binary);
    o << text;
    if (!o) throw std::runtime_error("cannot write " + (dir_ / name).string());
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

private:
  fs::path dir_;
};

ShootOptions shoot_options(const RunConfig& c) {
  ShootOptions so;
  so.ivp = c.ivp();
  return so;
}

LevelOptions level_options(const RunConfig& c) {
  LevelOptions lo;
  lo.shoot = shoot_options(c);
  lo.glue.shoot = lo.shoot;
  return lo;
}

void write_profile(Output& out, const RunConfig& c, const std::string& stem, const RadialFn& u,
                   const std::vector<double>& nodes, const std::string& title) {
  if (c.format == "csv") {
    std::ostringstream s;
    write_profile_csv(s, u);
    out.write(stem + ".csv", s.str());
  } else {
    out.write_json(stem + ".json", profile_json(u));
  }
  if (c.plot) {
    PlotSeries ser;
    auto pts = u.grid->points();
    ser.x.assign(pts.begin(), pts.end());
    ser.y = u.values;
    ser.x.push_back(u.grid->radius());
    ser.y.push_back(u.at(u.grid->radius())[0]);
    ser.label = "u";
    out.write(stem + ".svg", svg_plot({ser}, nodes, title, "r", "u(r)"));
  }
}

std::string profile_title(const Params& p, int k) {
  std::ostringstream s;
  s << "N=" << p.dim << " lambda=" << p.lambda << " theta=" << p.theta << " p=" << p.exponent << " k=" << k;
  return s.str();
}

void dump_failure(Output& out, const SolverError& e) {
  std::cerr << "solver failure: " << e.what() << "\n";
  if (!e.detail().empty()) {
    std::cerr << e.detail();
    out.write("scan.csv", e.detail());
  }
}

int run_glue_from(Output& out, const RunConfig& c, std::vector<double> init) {
  const Params params = c.params();
  GlueOptions go;
  go.shoot = shoot_options(c);
  go.leading_sign = c.sign;
  if (init.empty()) init = equal_volume_nodes(c.k, params.radius, params.dim);
  GluedSolution g = optimize_nodes(params, c.k, init, go);
  out.write_json("glue.json", glue_json(g, params, c.k));
  write_profile(out, c, "glue_profile", g.solution, g.nodes, "glued " + profile_title(params, c.k));
  return ok;
}

int cmd_solve(const RunConfig& c) {
  Output out(c);
  const Params params = c.params();
  std::vector<double> nodes;
  try {
    ShootingResult r = shoot_k(params, c.k, c.sign, shoot_options(c));
    out.write_json("summary.json", summary_json(r, params, c.k, c.sign));
    write_profile(out, c, "profile", r.solution, r.node_radii, profile_title(params, c.k));
    nodes = r.node_radii;
  } catch (const SolverError& e) {
    dump_failure(out, e);
    if (!c.glue) return solver;
  }
  if (!c.glue) return ok;
  try {
    return run_glue_from(out, c, c.init_nodes.empty() ? nodes : c.init_nodes);
  } catch (const SolverError& e) {
    dump_failure(out, e);
    return solver;
  }
}

int cmd_glue(const RunConfig& c) {
  Output out(c);
  if (c.k < 2) throw std::invalid_argument("glue needs k >= 2");
  try {
    return run_glue_from(out, c, c.init_nodes);
  } catch (const SolverError& e) {
    dump_failure(out, e);
    return solver;
  }
}

json subcheck(const std::string& name, bool passed, json detail = json::object()) {
  return {{"name", name}, {"passed", passed}, {"detail", std::move(detail)}};
}

json verify_bubbles_json(const RunConfig& c) {
  const auto v = verify_bubbles(c.dim, c.rho, c.eps_list(), c.radius);
  json subs = json::array();
  json ids = json::array();
  for (const auto& i : v.identities)
    ids.push_back({{"eps", i.eps}, {"grad_sq", i.grad_sq}, {"crit_norm", i.crit_norm}, {"mismatch", i.mismatch}});
  subs.push_back(subcheck("identities", v.identities_ok,
                          {{"samples", ids},
                           {"sobolev_numeric", v.sobolev_numeric},
                           {"sobolev_closed_form", v.sobolev_closed_form}}));
  for (const auto& e : v.exponents) {
    json d = fit_json(e.fit);
    d["expected"] = e.expected;
    d["tolerance"] = e.tolerance;
    subs.push_back(subcheck(to_string(e.quantity), e.passed, d));
  }
  json lm = fit_json(v.log_moment.fit);
  lm["ratios"] = v.log_moment.ratios;
  lm["local_c1"] = v.log_moment.local_c1;
  lm["c1"] = v.log_moment.c1;
  lm["spread"] = v.log_moment.spread;
  subs.push_back(subcheck("log_moment", v.log_moment.passed, lm));
  return subs;
}

json verify_gaps_json(const RunConfig& c, bool nodal) {
  const EnergyReport rep = energy_report(c.params(), nodal ? c.k_max : 1, level_options(c));
  json subs = json::array();
  auto add = [&](const std::string& name) {
    auto it = rep.gaps.find(name);
    if (it == rep.gaps.end()) {
      subs.push_back(subcheck(name, false, {{"error", "a level needed for this gap was not computed"}}));
      return;
    }
    subs.push_back(subcheck(name, it->second.verified, gap_json(it->second)));
  };
  if (nodal)
    for (int k = 1; k <= c.k_max; ++k) add("nodal-gap-" + std::to_string(k));
  else
    add("bc-gap");
  subs.push_back(subcheck("report", true, report_json(rep)));
  return subs;
}

json verify_logsob_json(const RunConfig& c) {
  const Params params = c.params();
  json subs = json::array();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& u : random_radial_functions(c.logsob_samples, c.seed, params))
    worst = std::min(worst, logsobolev_check(u, c.logsob_a, params));
  subs.push_back(subcheck("random", worst >= 0.0, {{"samples", c.logsob_samples}, {"min_margin", worst}}));
  for (int k = 1; k <= 2; ++k)
    for (int sign : {1, -1}) {
      const std::string name = "solution-k" + std::to_string(k) + (sign > 0 ? "+" : "-");
      try {
        const auto r = shoot_k(params, k, sign, shoot_options(c));
        const double m = logsobolev_check(r.solution, c.logsob_a, params);
        subs.push_back(subcheck(name, m >= 0.0, {{"margin", m}}));
      } catch (const SolverError& e) {
        subs.push_back(subcheck(name, false, {{"error", e.what()}}));
      }
    }
  return subs;
}

json verify_cross_term_json(const RunConfig& c) {
  const Params params = c.params();
  const Level g = ground_level(params, level_options(c));
  const auto eps = c.eps_list();
  const auto ct = cross_term_check(c.alpha, c.beta, eps, g.solution->solution, params, c.rho);
  json subs = json::array();
  json d = cross_term_json(ct);
  subs.push_back(subcheck("es5", ct.es5_ok, d));
  subs.push_back(subcheck("es6", ct.es6_ok, {{"d6_constant", ct.d6_constant}}));
  const double e_min = *std::min_element(eps.begin(), eps.end());
  const auto m = miranda_project(params, g.solution->solution, g.value, e_min, c.rho);
  const bool residuals = std::abs(m.residual_pos) <= 1e-8 && std::abs(m.residual_neg) <= 1e-8;
  subs.push_back(subcheck("miranda-residuals", residuals, miranda_json(m)));
  subs.push_back(subcheck("miranda-energy", m.below_threshold,
                          {{"energy", m.energy}, {"threshold", m.threshold}, {"margin", m.threshold - m.energy}}));
  return subs;
}

json verify_continuation_json(const RunConfig& c) {
  const auto rep = continuation(c.params(), c.continuation_k, c.p_schedule(), shoot_options(c));
  json subs = json::array();
  subs.push_back(subcheck("tracked", rep.tracked, continuation_json(rep)));
  subs.push_back(subcheck("final-gap", rep.converged, {{"final_gap", rep.final_gap}}));
  subs.push_back(
      subcheck("limsup", rep.limsup_ok, {{"tail_max", rep.tail_max}, {"critical_level", rep.critical_level}}));
  return subs;
}

int cmd_verify(const RunConfig& c, const std::string& check) {
  Output out(c);
  json subs;
  try {
    if (check == "bubbles") subs = verify_bubbles_json(c);
    else if (check == "bc-gap") subs = verify_gaps_json(c, false);
    else if (check == "nodal-gap") subs = verify_gaps_json(c, true);
    else if (check == "logsob") subs = verify_logsob_json(c);
    else if (check == "cross-term") subs = verify_cross_term_json(c);
    else if (check == "continuation") subs = verify_continuation_json(c);
  } catch (const SolverError& e) {
    dump_failure(out, e);
    return solver;
  }
  bool passed = true;
  for (const auto& s : subs) passed = passed && s["passed"].get<bool>();
  json rep{{"check", check}, {"params", params_json(c.params())}, {"passed", passed}, {"subchecks", subs}};
  out.write_json("verify-" + check + ".json", rep);
  for (const auto& s : subs) std::cout << (s["passed"].get<bool>() ? "PASS " : "FAIL ") << s["name"].get<std::string>() << "\n";
  return passed ? ok : gate;
}

bool axis_takes(const std::string& axis, const std::string& q) {
  if (axis == "eps") {
    try {
      parse_bubble_quantity(q);
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
  if (axis == "p") return q == "ground" || q == "level";
  return q == "ground" || q == "level" || q == "bc-gap" || q == "nodal-gap";
}

SweepRow sweep_point(const RunConfig& c, double x, const std::shared_ptr<const RadialGrid>& bubble_grid) {
  SweepRow row;
  row.axis = x;
  RunConfig pc = c;
  if (c.axis == "theta") pc.theta = x;
  if (c.axis == "lambda") pc.lambda = x;
  if (c.axis == "p") pc.exponent = x;
  if (c.axis == "eps") {
    BubbleSpec s;
    s.dim = c.dim;
    s.rho = c.rho;
    s.eps = x;
    row.value = bubble_quantity(parse_bubble_quantity(c.quantity), s, *bubble_grid);
    return row;
  }
  const Params params = pc.params();
  const LevelOptions lo = level_options(pc);
  if (c.quantity == "ground") {
    row.value = ground_level(params, lo).value;
  } else if (c.quantity == "level") {
    row.value = nodal_level(params, c.k, lo).value;
  } else {
    const GapCheck g = c.quantity == "bc-gap" ? gap_check_bc(params, lo) : gap_check_nodal(params, c.k, lo);
    row.value = g.margin;
    if (!g.verified) row.status = "unresolved";
  }
  return row;
}

int cmd_sweep(const RunConfig& c) {
  if (c.values.empty()) throw std::invalid_argument("sweep: empty grid");
  if (!axis_takes(c.axis, c.quantity))
    throw std::invalid_argument("sweep: quantity " + c.quantity + " is not available on axis " + c.axis);
  std::shared_ptr<const RadialGrid> bubble_grid;
  if (c.axis == "eps") {
    for (double e : c.values)
      if (!(e > 0.0)) throw std::invalid_argument("sweep: eps values must be positive");
    BubbleSpec s;
    s.dim = c.dim;
    s.rho = c.rho;
    bubble_grid = sweep_grid(s, *std::min_element(c.values.begin(), c.values.end()), c.radius);
  }
  Output out(c);
  std::vector<SweepRow> rows(c.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      try {
        rows[i] = sweep_point(c, c.values[i], bubble_grid);
      } catch (const std::exception& e) {
        rows[i].axis = c.values[i];
        rows[i].value = std::numeric_limits<double>::quiet_NaN();
        rows[i].status = "failed";
        std::cerr << "point " << c.values[i] << ": " << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(c.jobs, static_cast<int>(rows.size()));
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::size_t good = 0;
  for (const auto& r : rows) good += r.status != "failed";
  if (c.format == "csv") {
    std::ostringstream s;
    write_sweep_csv(s, rows);
    out.write("sweep.csv", s.str());
  } else {
    json j{{"axis", c.axis}, {"quantity", c.quantity}, {"params", params_json(c.params())}};
    json pts = json::array();
    for (const auto& r : rows) pts.push_back({{"axis", r.axis}, {"value", r.value}, {"status", r.status}});
    j["points"] = pts;
    out.write_json("sweep.json", j);
  }
  if (c.plot) {
    PlotSeries ser;
    for (const auto& r : rows) ser.x.push_back(r.axis), ser.y.push_back(r.value);
    ser.label = c.quantity;
    out.write("sweep.svg", svg_plot({ser}, {}, c.quantity + " vs " + c.axis, c.axis, c.quantity));
  }
  return 5 * good >= 4 * rows.size() ? ok : solver;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial solutions and energy estimates for the logarithmic Brezis-Nirenberg problem"};
  app.require_subcommand(1);
  Flags f;
  auto* solve = app.add_subcommand("solve", "Shoot a k-domain radial solution");
  add_common(solve, f);
  solve->add_flag("--glue", "Also run the gluing optimiser from the shooting nodes");
  auto* verify = app.add_subcommand("verify", "Run a named verification");
  add_common(verify, f);
  verify->add_option("check", f.check, "bubbles|bc-gap|nodal-gap|logsob|cross-term|continuation")->required();
  f.opts.emplace("k-max", verify->add_option("--k-max", f.k_max, "Largest k for nodal gaps"));
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep");
  add_common(sweep, f);
  f.opts.emplace("axis", sweep->add_option("--axis", f.axis, "theta|lambda|eps|p"));
  f.opts.emplace("quantity", sweep->add_option("--quantity", f.quantity, "ground|level|bc-gap|nodal-gap or a bubble quantity"));
  f.opts.emplace("values", sweep->add_option("--values", f.values, "Grid values")->delimiter(','));
  auto* glue = app.add_subcommand("glue", "Glue annulus solutions at optimised nodes");
  add_common(glue, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  RunConfig c;
  try {
    c = build_config(f);
    if (solve->parsed() && solve->get_option("--glue")->count()) c.glue = true;
    if (verify->parsed()) {
      static const std::set<std::string> checks{"bubbles", "bc-gap", "nodal-gap", "logsob", "cross-term",
                                                "continuation"};
      if (!checks.count(f.check)) throw std::invalid_argument("unknown check " + f.check);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }

  try {
    if (solve->parsed()) return cmd_solve(c);
    if (glue->parsed()) return cmd_glue(c);
    if (verify->parsed()) return cmd_verify(c, f.check);
    return cmd_sweep(c);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n" << e.detail();
    return solver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return solver;
  }
}
