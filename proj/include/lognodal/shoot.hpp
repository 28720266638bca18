#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lognodal/model.hpp"

namespace lognodal {

enum class Termination { reached_R, blow_up, step_failure };
std::string to_string(Termination t);

/// How the integrator represents the solution. With a reference the state is
/// w = u - sigma U_eps for a bubble U_eps that is refitted at every plateau of
/// u, which keeps large-amplitude cores well conditioned.
enum class ReferenceMode { automatic, off, on };

struct IvpOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Series hand-off radius; 0 selects min(1e-6 R, 1e-4 l(a)) with l(a) the
  /// natural length sqrt(|a / f(a)|).
  double r0 = 0.0;
  /// Integrate past R by this fraction (dense output beyond the boundary).
  double overshoot = 0.0;
  /// |u| above blowup_factor * (amplitude scale of the start) stops the run.
  double blowup_factor = 1e8;
  ReferenceMode reference = ReferenceMode::automatic;
  std::size_t max_steps = 2000000;

  /// Defaults with LOGNODAL_TOL (relative tolerance) applied when set.
  static IvpOptions defaults();
};

/// Dense solution of the radial ODE from a centre value or from a zero of an
/// annulus.
class Trajectory {
public:
  struct Step {
    double r = 0.0;
    double h = 0.0;
    double sigma = 0.0;
    double eps = 0.0;
    std::array<double, 10> rc{};
  };

  Termination termination = Termination::reached_R;
  /// Boundary radius the run aims for.
  double boundary = 1.0;
  double r_start = 0.0;
  double r_end = 0.0;
  int dim = 6;

  /// (u, u') at r within [0 or r_start, r_end].
  std::array<double, 2> eval(double r) const;
  const std::vector<Step>& steps() const { return steps_; }
  /// Radius of the inner endpoint (0 for a centre start).
  double inner() const { return inner_; }
  double initial_value() const { return a_; }
  double initial_slope() const { return b_; }
  /// Characteristic length of the core (bubble scale for centre starts).
  double core_scale() const { return core_scale_; }

private:
  friend class Integrator;
  std::vector<Step> steps_;
  double inner_ = 0.0;
  double a_ = 0.0;
  double b_ = 0.0;
  double fa_ = 0.0;
  double core_scale_ = 1.0;
};

/// (u', u'') for the first-order form of the radial equation.
std::array<double, 2> rhs(double r, double u, double v, const Params& params);

/// Taylor start (u(r0), u'(r0)) for u(0) = a, u'(0) = 0.
std::array<double, 2> series_start(double a, const Params& params, double r0);

/// Centre start u(0) = a, u'(0) = 0; integrates to params.radius.
Trajectory integrate_ivp(double a, const Params& params, const IvpOptions& options = IvpOptions::defaults());

/// Annulus start u(r_lo) = 0, u'(r_lo) = b; integrates to params.radius.
Trajectory integrate_annulus_ivp(double r_lo, double b, const Params& params,
                                 const IvpOptions& options = IvpOptions::defaults());

struct NodeCount {
  int nodal_domains = 1;
  std::vector<double> nodes;
};

/// Interior zeros in (inner, R), polished to relative accuracy 1e-14.
/// Throws SolverError on a tangential zero.
NodeCount count_nodal_domains(const Trajectory& traj, double R);

struct ScanEntry {
  double a = 0.0;
  int interior_zeros = -1;
  double boundary_value = 0.0;
  Termination termination = Termination::reached_R;
};

struct Band {
  double a = 0.0;
  double energy = 0.0;
};

struct ShootingResult {
  RadialFn solution;
  std::shared_ptr<const Trajectory> trajectory;
  double initial_value = 0.0;
  std::vector<double> node_radii;
  int nodal_domains = 1;
  double energy = 0.0;
  double ode_residual = 0.0;
  /// G(u) / int |u'|^2.
  double nehari_residual_total = 0.0;
  /// G(u^(j)) / int |u^(j)'|^2 per nodal domain.
  std::vector<double> nehari_residual_per_domain;
  double boundary_value = 0.0;
  std::vector<Band> bands;
  std::vector<ScanEntry> scan;
};

struct ShootOptions {
  IvpOptions ivp = IvpOptions::defaults();
  double a_min = 1e-3;
  double a_max = 1e150;
  double decades_per_step = 0.5;
  /// When set, the scan starts in a window of +-window_decades around it and
  /// widens to the full range only if no bracket is found there.
  std::optional<double> a_hint;
  double window_decades = 2.0;
  /// Keep only the first bracket found (skips least-energy selection).
  bool first_band_only = false;
  int max_retries = 5;
  /// The root is re-solved with rtol and atol scaled by this factor (rtol
  /// floored at 1e-13) before the solution is packaged; 1 disables.
  double polish_factor = 1e-2;
};

/// Radial solution with exactly k nodal domains and sign(u(0)) = sign.
ShootingResult shoot_k(const Params& params, int k, int sign, const ShootOptions& options = {});

/// Positive solution on the annulus [r_lo, params.radius] vanishing at both
/// ends, shot in the slope b = u'(r_lo). The scan range and hint of
/// `options` refer to the amplitude scale b * r_lo; bands report b.
ShootingResult shoot_annulus(const Params& params, double r_lo, const ShootOptions& options = {});

/// Builds the grid-sampled solution, energy and residuals for a trajectory
/// whose boundary value has been driven to zero.
ShootingResult package_solution(std::shared_ptr<const Trajectory> traj, const Params& params);

/// max |(r^{N-1}u')' + r^{N-1} f(u)| / (1 + r^{N-1}|f(u)|) over the abscissae,
/// outer derivative by a five-point centred difference of the evaluator.
double ode_residual(const RadialFn& u, const Params& params);

} // namespace lognodal
