#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lognodal/model.hpp"
#include "lognodal/quadrature.hpp"

namespace lognodal {

/// [N(N-2)]^{(N-2)/4}, the centre value of the unit-scale bubble.
double bubble_constant(int dim);

/// U_eps(r) = [N(N-2) eps^2]^{(N-2)/4} / (eps^2 + r^2)^{(N-2)/2}.
double bubble_value(double eps, double r, int dim);
double bubble_derivative(double eps, double r, int dim);

/// Scale eps whose bubble has centre value |a|.
double bubble_scale_for_height(double a, int dim);

/// S^{N/2} = int |grad U_1|^2 over R^N, cross-checked against int U_1^{2*}.
double sobolev_level(int dim);

/// S^{N/2} from S = pi N (N-2) (Gamma(N/2) / Gamma(N))^{2/N}.
double sobolev_level_closed_form(int dim);

/// int |grad U_eps|^2 and int U_eps^{2*} over R^N.
struct BubbleIdentity {
  double eps = 1.0;
  double grad_sq = 0.0;
  double crit_norm = 0.0;
  /// |grad_sq - crit_norm| / S^{N/2}.
  double mismatch = 0.0;
};
BubbleIdentity bubble_identity(double eps, int dim);

/// Plateau 1 on [0, rho], quintic smoothstep down to 0 on [rho, 2 rho].
double cutoff(double r, double rho);
double cutoff_derivative(double r, double rho);

struct BubbleSpec {
  double eps = 0.01;
  double rho = 0.25;
  int dim = 6;

  void validate() const;
};

/// Cut-off bubble psi_eps(r) = xi(r) U_eps(r) on the grid.
RadialFn psi_eps(const BubbleSpec& spec, std::shared_ptr<const RadialGrid> grid);
/// Exact (value, derivative) of psi_eps.
std::array<double, 2> psi_eps_at(const BubbleSpec& spec, double r);

enum class BubbleQuantity {
  grad_sq_defect,
  crit_norm_defect,
  l2_norm,
  l1_norm,
  crit_minus_one_norm,
  log_moment,
};

BubbleQuantity parse_bubble_quantity(const std::string& name);
std::string to_string(BubbleQuantity q);

/// Value of the quantity for psi_eps. Defects are returned as the signed
/// difference from S^{N/2}, evaluated as tail integrals so that no leading
/// order cancellation occurs.
double bubble_quantity(BubbleQuantity q, const BubbleSpec& spec, const RadialGrid& grid);

struct AsymptoticFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r_squared = 0.0;
  double eps_min = 0.0;
  double eps_max = 0.0;
  bool log_corrected = false;
  std::vector<std::pair<double, double>> samples;
};

/// Least squares fit of log|y| against log x (or log(x^2 |log x|) when
/// log_corrected; the exponent is then the power of x^2 |log x|).
AsymptoticFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys, bool log_corrected);

/// 2^{-10} rho, ..., 2^{-4} rho.
std::vector<double> default_eps_list(double rho);

/// Grid that resolves every bubble in the sweep and has edges at rho, 2 rho.
std::shared_ptr<const RadialGrid> sweep_grid(const BubbleSpec& tmpl, double eps_min, double radius);

AsymptoticFit asymptotic_sweep(BubbleQuantity q, const std::vector<double>& eps_list, const BubbleSpec& tmpl,
                               const RadialGrid& grid);

/// Fitted exponent of one quantity against its expected value.
struct ExponentCheck {
  BubbleQuantity quantity = BubbleQuantity::l2_norm;
  AsymptoticFit fit;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Log-moment coefficient: int psi^2 log psi^2 = eps^2 (C1 |log eps| + D) + ...
struct LogMomentCheck {
  AsymptoticFit fit;
  /// y / (eps^2 |log eps|) at each eps.
  std::vector<double> ratios;
  /// Slopes of y / eps^2 against |log eps| between neighbouring eps.
  std::vector<double> local_c1;
  double c1 = 0.0;
  /// (max - min) / |mean| of local_c1.
  double spread = 0.0;
  bool passed = false;
};

struct BubbleVerification {
  std::vector<BubbleIdentity> identities;
  double sobolev_numeric = 0.0;
  double sobolev_closed_form = 0.0;
  std::vector<ExponentCheck> exponents;
  LogMomentCheck log_moment;
  bool identities_ok = false;
  bool exponents_ok = false;
  bool passed = false;
};

/// Identities at eps in {0.1, 1, 10} and the exponent fits over eps_list
/// (targets N-2, N, 2, (N-2)/2, (N-2)/2, meaningful for N >= 5).
BubbleVerification verify_bubbles(int dim, double rho, const std::vector<double>& eps_list, double radius = 1.0);

} // namespace lognodal
