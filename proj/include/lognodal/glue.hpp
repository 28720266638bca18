#pragma once

#include <string>
#include <vector>

#include "lognodal/model.hpp"
#include "lognodal/shoot.hpp"

namespace lognodal {

/// Piecewise solution assembled from positive solutions on consecutive annuli.
struct GluedSolution {
  /// Component j lives on [nodes[j-1], nodes[j]] (with 0 and R at the ends);
  /// its solution is sampled on a grid of radius nodes[j].
  std::vector<ShootingResult> components;
  std::vector<double> nodes;
  int leading_sign = 1;
  RadialFn solution;
  double total_energy = 0.0;
  /// |u'(r_j^-) - u'(r_j^+)| at each interior node.
  std::vector<double> mismatches;
  double max_slope = 0.0;
  /// Distinct local minima from the multi-start, (nodes, energy).
  std::vector<std::pair<std::vector<double>, double>> local_minima;
  int evaluations = 0;
};

/// Least-energy positive solution on [r_lo, r_hi] vanishing at both ends
/// (u'(0) = 0 instead when r_lo = 0). The returned result uses params with
/// radius r_hi.
ShootingResult annulus_positive_solution(const Params& params, double r_lo, double r_hi,
                                         const ShootOptions& options = {});

/// Alternating-sign concatenation: component j enters with sign
/// leading_sign * (-1)^(j-1).
RadialFn assemble_glued(const std::vector<RadialFn>& components, const std::vector<double>& nodes, int leading_sign);

std::vector<double> derivative_mismatch(const GluedSolution& glued);

/// r_j = R (j / k)^{1/N}.
std::vector<double> equal_volume_nodes(int k, double R, int dim);

struct GlueOptions {
  ShootOptions shoot;
  int leading_sign = 1;
  /// Nelder–Mead budget and stopping rule on the total energy.
  int max_evaluations = 60;
  double energy_rtol = 1e-11;
  /// Consecutive nodes and the last node and R stay this far apart (times R).
  double min_gap = 1e-3;
  /// Acceptance: each mismatch at most gate * max|u'|.
  double mismatch_gate = 1e-5;
  int polish_iterations = 40;
  /// Further initial node vectors for the multi-start.
  std::vector<std::vector<double>> extra_starts;
};

/// Minimises the sum of annulus ground-state energies over the node
/// positions, then drives the derivative mismatches to zero.
GluedSolution optimize_nodes(const Params& params, int k, const std::vector<double>& init_nodes,
                             const GlueOptions& options = {});

} // namespace lognodal
