// SPDX-License-Identifier: Apache-2.0

#include "thzirs/bcs.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace thz {

void ProblemInstance::validate() const {
  scene.validate();
  if (scene.ues.empty()) throw std::invalid_argument("at least one UE is required");
  if (bands.empty()) throw std::invalid_argument("at least one sub-band is required");
  for (const auto& b : bands) b.validate();
  if (rate_requirements.size() != scene.ues.size())
    throw std::invalid_argument("one rate requirement per UE expected");
  for (double r : rate_requirements)
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("rate requirements must be finite and >= 0");
  if (!(p_max > 0.0) || !std::isfinite(p_max)) throw std::invalid_argument("p_max must be positive");
  (void)box();  // throws for an array that does not fit
}

void GridSpec::validate() const {
  if (!(step_x > 0.0) || !(step_y > 0.0) || !std::isfinite(step_x) || !std::isfinite(step_y))
    throw std::invalid_argument("grid steps must be positive");
}

GainTable channel_gains(const ProblemInstance& instance, const IrsPlacement& placement, const PhaseVector& phases) {
  const std::size_t n_ue = instance.scene.ues.size();
  GainTable gains(n_ue, instance.bands.size());
  for (std::size_t u = 0; u < n_ue; ++u)
    for (std::size_t i = 0; i < instance.bands.size(); ++i)
      gains(u, i) = received_power(
          effective_vector(instance.bands[i], instance.medium, 1.0, placement, instance.scene, u), phases);
  return gains;
}

PhaseVector initial_phases(const ProblemInstance& instance, const IrsPlacement& placement) {
  double lo = instance.bands.front().center_hz - 0.5 * instance.bands.front().bandwidth_hz;
  double hi = instance.bands.front().center_hz + 0.5 * instance.bands.front().bandwidth_hz;
  for (const auto& b : instance.bands) {
    lo = std::min(lo, b.center_hz - 0.5 * b.bandwidth_hz);
    hi = std::max(hi, b.center_hz + 0.5 * b.bandwidth_hz);
  }
  const double n2 = static_cast<double>(placement.element_count * placement.element_count);

  // shortfall against the best the UE could get from one band at full power
  std::size_t pick = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < instance.scene.ues.size(); ++u) {
    const double d = path_length(placement, instance.scene, u);
    double best_rate = 0.0;
    for (const auto& b : instance.bands) {
      const double g = std::norm(cascaded_gain(b.center_hz, d, instance.medium.absorption(b.center_hz)));
      best_rate = std::max(best_rate, subband_rate(b, instance.p_max, n2 * g));
    }
    const double shortfall = instance.rate_requirements[u] - best_rate;
    if (shortfall > worst) {
      worst = shortfall;
      pick = u;
    }
  }
  return optimal_single_ue_phases(0.5 * (lo + hi), placement, instance.scene, pick);
}

Solution inner_solve(const ProblemInstance& instance, const IrsPlacement& placement, const PhaseVector& start,
                     const InnerOptions& options) {
  if (start.size() != placement.element_count) throw std::invalid_argument("start phases do not match the array");
  if (!(options.sigma >= 0.0) || options.max_rounds < 1) throw std::invalid_argument("bad inner options");

  AllocationProblem problem;
  problem.bands = instance.bands;
  problem.p_max = instance.p_max;
  problem.rate_requirements = instance.rate_requirements;

  Solution sol;
  sol.placement = placement;
  PhaseVector phases = start;
  AllocationResult alloc;
  std::vector<std::size_t> incumbent;
  double previous = 0.0;

  for (int round = 1; round <= options.max_rounds; ++round) {
    problem.gains = channel_gains(instance, placement, phases);
    alloc = solve_allocation(problem, options.alloc, incumbent.empty() ? nullptr : &incumbent);
    incumbent = alloc.assignment.owner;
    const double rate = alloc.feasible ? alloc.sum_rate : 0.0;
    sol.trace.push_back(rate);
    sol.rounds = round;

    if (!options.optimize_phases ||
        (round > 1 && std::abs(rate - previous) <= options.sigma * std::max(rate, previous))) {
      sol.converged = true;
      break;
    }
    if (round == options.max_rounds) break;
    previous = rate;

    // Links carrying power become constraints at their current level.
    // Crumbs left by an infeasible allocation are ignored.
    std::vector<EffectiveVector> links;
    std::vector<double> targets;
    for (std::size_t i = 0; i < instance.bands.size(); ++i) {
      const double p = alloc.assignment.power[i];
      const std::size_t u = alloc.assignment.owner[i];
      if (!(p > 1e-12 * instance.p_max) || !(problem.gains(u, i) > 0.0)) continue;
      links.push_back(effective_vector(instance.bands[i], instance.medium, p, placement, instance.scene, u));
      targets.push_back(p * problem.gains(u, i));
    }
    if (links.empty()) {
      sol.converged = true;
      break;
    }
    phases = sca_phase_optimize(links, targets, phases, options.sca).phases;
  }

  sol.phases = phases;
  sol.assignment = alloc.assignment;
  sol.ue_rates = alloc.rates;
  sol.feasible = alloc.feasible;
  sol.sum_rate = alloc.feasible ? alloc.sum_rate : 0.0;
  return sol;
}

std::vector<std::pair<double, double>> grid_points(const PlacementBox& box, const GridSpec& grid) {
  grid.validate();
  const auto nx = static_cast<std::size_t>(std::floor(box.x_max / grid.step_x + 1e-9));
  const auto ny = static_cast<std::size_t>(std::floor(box.y_max / grid.step_y + 1e-9));
  std::vector<std::pair<double, double>> pts;
  pts.reserve(nx * ny);
  for (std::size_t a = 1; a <= nx; ++a)
    for (std::size_t b = 1; b <= ny; ++b)
      pts.emplace_back(std::min(box.x_max, static_cast<double>(a) * grid.step_x),
                       std::min(box.y_max, static_cast<double>(b) * grid.step_y));
  return pts;
}

namespace {

// Every candidate is solved into its own slot; the arg-max is taken in
// slot order afterwards, so the thread count cannot change the answer.
Solution search(const ProblemInstance& instance, const GridSpec& grid, const InnerOptions& options,
                ExecPolicy policy, const PhaseVector* fixed_phases) {
  instance.validate();
  const PlacementBox box = instance.box();
  auto pts = grid_points(box, grid);
  if (pts.empty()) throw std::invalid_argument("placement grid is empty; reduce the step sizes");
  const std::size_t grid_count = pts.size();
  if (grid.include_distance_anchor) {
    const auto md = solve_min_total_distance(instance.scene, box);
    pts.emplace_back(md.x, md.y);
  }

  std::vector<Solution> slots(pts.size());
  std::vector<std::exception_ptr> errors(pts.size());
  auto solve_one = [&](std::size_t k) {
    try {
      const IrsPlacement placement = instance.placement_at(pts[k].first, pts[k].second);
      slots[k] = fixed_phases ? inner_solve(instance, placement, *fixed_phases, options)
                              : inner_solve(instance, placement, options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const auto count = static_cast<long long>(pts.size());
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long k = 0; k < count; ++k) solve_one(static_cast<std::size_t>(k));
  } else {
    for (long long k = 0; k < count; ++k) solve_one(static_cast<std::size_t>(k));
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  bool found = false;
  std::size_t infeasible = 0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (!slots[k].feasible) {
      ++infeasible;
      continue;
    }
    if (!found || slots[k].sum_rate > slots[best].sum_rate) {
      best = k;
      found = true;
    }
  }
  Solution out = std::move(slots[best]);
  out.grid_points = grid_count;
  out.infeasible_points = infeasible;
  return out;
}

}  // namespace

Solution bcs_solve(const ProblemInstance& instance, const GridSpec& grid, const InnerOptions& options,
                   ExecPolicy policy) {
  return search(instance, grid, options, policy, nullptr);
}

Solution baseline_ran_loc(const ProblemInstance& instance, SplitMix64& rng, const InnerOptions& options) {
  instance.validate();
  const PlacementBox box = instance.box();
  const double x = rng.uniform(box.x_min, box.x_max);
  const double y = rng.uniform(box.y_min, box.y_max);
  return inner_solve(instance, instance.placement_at(x, y), options);
}

Solution baseline_ran_phi(const ProblemInstance& instance, SplitMix64& rng, const GridSpec& grid,
                          const InnerOptions& options, ExecPolicy policy) {
  std::vector<double> angles(instance.element_count);
  for (double& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const PhaseVector fixed(std::move(angles));
  InnerOptions frozen = options;
  frozen.optimize_phases = false;
  return search(instance, grid, frozen, policy, &fixed);
}

Solution baseline_mini_dis(const ProblemInstance& instance, const InnerOptions& options) {
  instance.validate();
  const auto md = solve_min_total_distance(instance.scene, instance.box());
  return inner_solve(instance, instance.placement_at(md.x, md.y), options);
}

}  // namespace thz
