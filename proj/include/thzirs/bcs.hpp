// SPDX-License-Identifier: Apache-2.0
//
// Placement search: a grid over IRS anchor positions, and at every point
// an alternation of sub-band allocation and phase design. Also the three
// comparison schemes (random location, random phases, least distance).

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "thzirs/allocation.hpp"
#include "thzirs/channel.hpp"
#include "thzirs/geometry.hpp"
#include "thzirs/parallel.hpp"
#include "thzirs/phase_opt.hpp"
#include "thzirs/rng.hpp"

namespace thz {

struct ProblemInstance {
  Scene scene;
  std::vector<SubBand> bands;
  Medium medium;
  std::size_t element_count = 20;
  double spacing_m = 0.005;
  double p_max = 1.0;
  std::vector<double> rate_requirements;  // one per UE

  void validate() const;
  [[nodiscard]] PlacementBox box() const { return PlacementBox::for_array(scene, element_count, spacing_m); }
  [[nodiscard]] IrsPlacement placement_at(double x, double y) const { return {element_count, spacing_m, x, y}; }
};

struct Solution {
  IrsPlacement placement;
  PhaseVector phases;
  Assignment assignment;
  std::vector<double> ue_rates;
  double sum_rate = 0.0;   // 0 whenever infeasible
  bool feasible = false;
  bool converged = false;  // inner alternation settled before the round cap
  int rounds = 0;
  std::vector<double> trace;  // sum rate after each allocation step, 0 while infeasible
  std::size_t grid_points = 0;       // placements evaluated (searches only)
  std::size_t infeasible_points = 0;
};

struct InnerOptions {
  double sigma = 1e-3;  // relative change in sum rate that ends the alternation
  int max_rounds = 30;
  bool optimize_phases = true;
  ScaOptions sca;
  AllocationOptions alloc;
};

/// |h_{u,i}|^2 for every UE and band under the given phases.
GainTable channel_gains(const ProblemInstance& instance, const IrsPlacement& placement, const PhaseVector& phases);

/// Single-UE aligned phases for the UE with the largest rate shortfall,
/// at the centre of the band plan.
PhaseVector initial_phases(const ProblemInstance& instance, const IrsPlacement& placement);

Solution inner_solve(const ProblemInstance& instance, const IrsPlacement& placement, const PhaseVector& start,
                     const InnerOptions& options = {});
inline Solution inner_solve(const ProblemInstance& instance, const IrsPlacement& placement,
                            const InnerOptions& options = {}) {
  return inner_solve(instance, placement, initial_phases(instance, placement), options);
}

struct GridSpec {
  double step_x = 0.25;
  double step_y = 0.25;
  // Also evaluate the least-total-distance anchor next to the grid.
  bool include_distance_anchor = true;

  void validate() const;
};

/// X = k dx (k = 1..floor(x_max / dx)), likewise Y; X-major order.
std::vector<std::pair<double, double>> grid_points(const PlacementBox& box, const GridSpec& grid);

Solution bcs_solve(const ProblemInstance& instance, const GridSpec& grid = {}, const InnerOptions& options = {},
                   ExecPolicy policy = ExecPolicy::Parallel);

/// Uniform anchor in the placement box, everything else optimised.
Solution baseline_ran_loc(const ProblemInstance& instance, SplitMix64& rng, const InnerOptions& options = {});
/// Uniform random phases held fixed; placement and allocation optimised.
Solution baseline_ran_phi(const ProblemInstance& instance, SplitMix64& rng, const GridSpec& grid = {},
                          const InnerOptions& options = {}, ExecPolicy policy = ExecPolicy::Parallel);
/// Anchor minimising total path length, everything else optimised.
Solution baseline_mini_dis(const ProblemInstance& instance, const InnerOptions& options = {});

}  // namespace thz
