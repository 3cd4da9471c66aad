// SPDX-License-Identifier: Apache-2.0
//
// Sub-band assignment and power control for fixed channel gains.
// Every sub-band goes to exactly one UE; total power is capped; each UE
// must reach its rate floor. Solved by dual decomposition with an exact
// water-filling re-solve per candidate assignment.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "thzirs/channel.hpp"
#include "thzirs/parallel.hpp"

namespace thz {

/// |h_{u,i}|^2, UE-major.
struct GainTable {
  std::size_t ue_count = 0;
  std::size_t band_count = 0;
  std::vector<double> values;

  GainTable() = default;
  GainTable(std::size_t ues, std::size_t bands) : ue_count(ues), band_count(bands), values(ues * bands, 0.0) {}
  double& operator()(std::size_t u, std::size_t i) { return values[u * band_count + i]; }
  double operator()(std::size_t u, std::size_t i) const { return values[u * band_count + i]; }
};

struct AllocationProblem {
  GainTable gains;
  std::vector<SubBand> bands;
  double p_max = 1.0;
  std::vector<double> rate_requirements;  // bits/s per UE

  void validate() const;
  [[nodiscard]] std::size_t ue_count() const { return gains.ue_count; }
  [[nodiscard]] std::size_t band_count() const { return gains.band_count; }
};

struct Assignment {
  std::vector<std::size_t> owner;  // owner[i] = UE served on band i
  std::vector<double> power;       // W per band
  std::vector<double> auxiliary;   // t_{u,i}, UE-major

  [[nodiscard]] bool alpha(std::size_t u, std::size_t i) const { return owner[i] == u; }
};

struct DualState {
  double lambda = 0.0;      // power-budget multiplier
  std::vector<double> mu;   // per-UE rate multipliers
};

/// t_{u,i} = p_i |h_{u,i}|^2 on owned bands, 0 elsewhere.
std::vector<double> tight_auxiliary(const Assignment& assignment, const GainTable& gains);

std::vector<double> ue_rates(const AllocationProblem& problem, std::span<const std::size_t> owner,
                             std::span<const double> power);

/// Exact optimum of the power sub-problem once the owners are fixed:
/// per-UE water levels nu_u = max(1/lambda, nu_u^min) with a common level
/// set by the power budget.
struct PowerSolution {
  std::vector<double> power;
  DualState duals;
  double required_power = 0.0;  // least total power meeting every floor
  double sum_rate = 0.0;
  bool feasible = false;
};

PowerSolution solve_power(const AllocationProblem& problem, std::span<const std::size_t> owner);

struct AllocationOptions {
  double tolerance = 1e-6;
  int max_iterations = 2000;
  double step = 0.5;  // multiplier step c / sqrt(t)
  // Up to this many owner maps (U^I) every map gets an exact power solve
  // on top of the dual candidates; 0 leaves only the dual search.
  std::size_t exhaustive_limit = 256;
};

struct AllocationResult {
  Assignment assignment;
  DualState duals;
  std::vector<double> rates;  // per UE, bits/s
  double sum_rate = 0.0;
  int dual_iterations = 0;
  bool feasible = false;
  bool provably_infeasible = false;  // some floor is out of reach even with every band
};

/// `incumbent` (owners only) joins the candidate set, so the result is
/// never worse than re-optimising the power of a previous assignment.
AllocationResult solve_allocation(const AllocationProblem& problem, const AllocationOptions& options = {},
                                  const std::vector<std::size_t>* incumbent = nullptr);

/// Exhaustive search over all owner maps and a power grid (the last band
/// takes the remainder of the budget). Limited to 3 UEs and 4 bands.
AllocationResult brute_force_allocation(const AllocationProblem& problem, double power_grid_step,
                                        ExecPolicy policy = ExecPolicy::Serial);

}  // namespace thz
