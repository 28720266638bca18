#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lognodal/bubbles.hpp"
#include "lognodal/glue.hpp"
#include "lognodal/model.hpp"
#include "lognodal/shoot.hpp"

namespace lognodal {

/// When the gluing path runs inside nodal_level: never, only from the nodes
/// of a successful shooting solve, or always (equal-volume start if shooting
/// failed).
enum class GlueMode { off, warm, always };

struct LevelOptions {
  ShootOptions shoot;
  GlueOptions glue;
  GlueMode glue_mode = GlueMode::warm;
  /// Re-solve with tolerances divided by 10 and report the change as spread.
  bool refine_check = true;
};

struct Level {
  int k = 1;
  double value = 0.0;
  /// "shoot" or "glue".
  std::string method = "shoot";
  std::optional<double> shoot_energy;
  std::optional<double> glue_energy;
  /// |level at tol - level at tol / 10| of the shooting path.
  double spread = 0.0;
  std::vector<double> nodes;
  std::optional<ShootingResult> solution;
  std::vector<std::string> notes;
};

/// C: energy of the least-energy positive radial solution.
Level ground_level(const Params& params, const LevelOptions& options = {});

/// B_k: the lower of the shooting and gluing energies with k nodal domains.
Level nodal_level(const Params& params, int k, const LevelOptions& options = {});

/// Relative resolution below which an energy difference is not resolved by
/// the quadrature and integrator (added to the tolerance spreads).
inline constexpr double kLevelResolution = 1e-10;

struct GapCheck {
  std::string name;
  /// Positive means the strict inequality holds for the computed levels.
  double margin = 0.0;
  /// Sum of level spreads plus kLevelResolution times the largest level.
  double uncertainty = 0.0;
  /// margin > uncertainty.
  bool verified = false;
  std::vector<std::string> notes;
};

/// C + S^{N/2}/N - B_2.
GapCheck gap_check_bc(const Level& ground, const Level& two_domain, int dim);
GapCheck gap_check_bc(const Params& params, const LevelOptions& options = {});

/// B_k + S^{N/2}/N - B_{k+1}.
GapCheck gap_check_nodal(const Level& lower, const Level& upper, int dim);
GapCheck gap_check_nodal(const Params& params, int k, const LevelOptions& options = {});

struct ContinuationPoint {
  double p = 0.0;
  double level = 0.0;
  ShootingResult solution;
};

struct ContinuationReport {
  int k = 2;
  std::vector<ContinuationPoint> trace;
  /// The critical level B_k the trace is compared with.
  double critical_level = 0.0;
  bool tracked = false;
  std::optional<double> lost_at;
  std::string failure;
  /// |B_{p_last} - B_k| / B_k.
  double final_gap = 0.0;
  /// max of the last three B_p.
  double tail_max = 0.0;
  bool converged = false;
  bool limsup_ok = false;
};

/// p_n = 2* - 0.5 * 2^{-n}, n = 0 .. count - 1.
std::vector<double> default_schedule(int dim, int count = 9);

/// Solves the k-domain problem along increasing p with warm-started scans and
/// compares the trace with the critical level. Gates: final gap <= 1e-2 and
/// tail max <= 1.01 B_k.
ContinuationReport continuation(const Params& params, int k, const std::vector<double>& schedule,
                                const ShootOptions& options = {});
/// Same with a precomputed critical level.
ContinuationReport continuation(const Params& params, int k, const std::vector<double>& schedule,
                                double critical_level, const ShootOptions& options = {});

/// (a/pi) |grad u|^2 + (log |u|_2^2 - N (1 + log a)) |u|_2^2 - int u^2 log u^2.
/// Not dilation invariant: for a > 1 wide Gaussians make it negative, so a
/// sign is only guaranteed when the first Dirichlet eigenvalue of B_R is large
/// enough (R <= 1.39 for N = 6, a = pi/2).
double logsobolev_check(const RadialFn& u, double a, const Params& params);

/// Seeded radial test functions vanishing at R: sums of one to three terms
/// c (1 - r^2/R^2)^q (1 + r^2/s^2)^{-m} with random signs and scales.
std::vector<RadialFn> random_radial_functions(int count, unsigned seed, const Params& params);

struct CrossTermReport {
  double alpha = 1.0;
  double beta = -1.0;
  std::vector<double> eps;
  /// |int|w|^{2*} - int|alpha u_g|^{2*} - int|beta psi|^{2*}|.
  std::vector<double> d5;
  /// split log-moments minus the combined log-moment.
  std::vector<double> d6;
  AsymptoticFit d5_fit;
  /// Bound constant: largest d6 / eps^{(N-2)/2} over the upper half of the sweep.
  double d6_constant = 0.0;
  /// Each eps: d6 <= 2 * d6_constant * eps^{(N-2)/2}.
  std::vector<bool> d6_within;
  bool es5_ok = false;
  bool es6_ok = false;
};

/// Mixed-term estimates for alpha u_g + beta psi_eps over an eps sweep.
CrossTermReport cross_term_check(double alpha, double beta, const std::vector<double>& eps_list,
                                 const RadialFn& ground_state, const Params& params, double rho);

struct MirandaResult {
  double eps = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  /// G(w^+) / |grad w^+|^2 and G(w^-) / |grad w^-|^2 at the returned pair.
  double residual_pos = 0.0;
  double residual_neg = 0.0;
  double node = 0.0;
  double energy = 0.0;
  /// C + S^{N/2}/N.
  double threshold = 0.0;
  bool below_threshold = false;
  int iterations = 0;
  bool used_fallback = false;
};

/// (alpha > 0, beta < 0) with both sign parts of alpha u_g + beta psi_eps on
/// the Nehari set; `ground` is the level C of u_g.
MirandaResult miranda_project(const Params& params, const RadialFn& ground_state, double ground, double eps,
                              double rho);

/// Levels and gap verdicts for one parameter set.
struct EnergyReport {
  Params params;
  double ground_level = 0.0;
  /// B_2, the radial upper bound used for B.
  std::optional<double> sign_changing_level;
  std::map<int, Level> nodal_levels;
  std::map<int, std::string> failures;
  double sobolev_term = 0.0;
  std::map<std::string, GapCheck> gaps;
};

/// Computes B_1 .. B_{k_max + 1} and the bc and nodal gaps k = 1 .. k_max.
EnergyReport energy_report(const Params& params, int k_max, const LevelOptions& options = {});

} // namespace lognodal
