#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lognodal/bubbles.hpp"
#include "lognodal/estimates.hpp"
#include "lognodal/glue.hpp"
#include "lognodal/shoot.hpp"

namespace lognodal {

/// Everything a CLI run needs; round-trips through to_json / from_json.
struct RunConfig {
  int dim = 6;
  double lambda = 0.0;
  double theta = 1.0;
  /// Absent means the critical exponent of `dim`.
  std::optional<double> exponent;
  double radius = 1.0;

  int k = 1;
  int sign = 1;
  bool glue = false;
  std::vector<double> init_nodes;

  double rtol = 1e-10;
  double atol = 1e-12;

  double rho = 0.25;
  std::vector<double> eps;

  int continuation_k = 2;
  std::vector<double> schedule;

  int k_max = 3;
  double logsob_a = 1.5707963267948966;
  int logsob_samples = 100;
  unsigned seed = 1;
  double alpha = 1.0;
  double beta = -1.0;

  std::string axis = "theta";
  std::vector<double> values;
  std::string quantity = "bc-gap";

  std::string out = "out";
  std::string format = "csv";
  bool plot = false;
  int jobs = 1;

  Params params() const;
  IvpOptions ivp() const;
  /// eps, or the default dyadic list for rho.
  std::vector<double> eps_list() const;
  /// schedule, or the default p-schedule.
  std::vector<double> p_schedule() const;
  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Reads a JSON config file; unknown keys are rejected.
RunConfig load_config(const std::string& path);

/// `r,u,du` rows for every abscissa plus the endpoint R.
void write_profile_csv(std::ostream& os, const RadialFn& u);
nlohmann::json profile_json(const RadialFn& u);

/// `axis,value,status` rows.
struct SweepRow {
  double axis = 0.0;
  double value = 0.0;
  std::string status = "ok";
};
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

nlohmann::json params_json(const Params& p);
nlohmann::json summary_json(const ShootingResult& r, const Params& p, int k, int sign);
nlohmann::json glue_json(const GluedSolution& g, const Params& p, int k);
nlohmann::json fit_json(const AsymptoticFit& f);
nlohmann::json gap_json(const GapCheck& g);
nlohmann::json level_json(const Level& l);
nlohmann::json report_json(const EnergyReport& r);
nlohmann::json continuation_json(const ContinuationReport& r);
nlohmann::json cross_term_json(const CrossTermReport& r);
nlohmann::json miranda_json(const MirandaResult& m);

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
};

/// Self-contained SVG line plot with linear axes; `marks` become vertical
/// rules.
std::string svg_plot(const std::vector<PlotSeries>& series, const std::vector<double>& marks, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel);

} // namespace lognodal
