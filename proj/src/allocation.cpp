// SPDX-License-Identifier: Apache-2.0

#include "thzirs/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace thz {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRateSlack = 1e-9;  // relative tolerance on the rate floors

// Water-filling power on one band at water level nu.
double band_power(double nu, const SubBand& band, double gain) {
  if (!(gain > 0.0)) return 0.0;
  return std::max(0.0, nu * band.bandwidth_hz / kLn2 - 1.0 / (band.inverse_noise_power() * gain));
}

double activation_level(const SubBand& band, double gain) {
  return kLn2 / (band.bandwidth_hz * band.inverse_noise_power() * gain);
}

struct UeView {
  const AllocationProblem* problem;
  std::size_t ue;
  std::vector<std::size_t> bands;

  [[nodiscard]] double gain(std::size_t i) const { return problem->gains(ue, i); }
  [[nodiscard]] double power(double nu) const {
    double p = 0.0;
    for (auto i : bands) p += band_power(nu, problem->bands[i], gain(i));
    return p;
  }
  [[nodiscard]] double rate(double nu) const {
    double r = 0.0;
    for (auto i : bands) r += subband_rate(problem->bands[i], band_power(nu, problem->bands[i], gain(i)), gain(i));
    return r;
  }
  [[nodiscard]] double lowest_activation() const {
    double lo = kInf;
    for (auto i : bands)
      if (gain(i) > 0.0) lo = std::min(lo, activation_level(problem->bands[i], gain(i)));
    return lo;
  }
};

// Smallest water level whose rate meets `target`; +inf when unreachable.
double min_water_level(const UeView& view, double target) {
  if (target <= 0.0) return 0.0;
  const double start = view.lowest_activation();
  if (!std::isfinite(start)) return kInf;
  double lo = start;
  double hi = 2.0 * start;
  while (view.rate(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi) || !std::isfinite(view.power(hi))) return kInf;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (view.rate(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

std::vector<UeView> split_by_owner(const AllocationProblem& problem, std::span<const std::size_t> owner) {
  std::vector<UeView> views;
  views.reserve(problem.ue_count());
  for (std::size_t u = 0; u < problem.ue_count(); ++u) views.push_back({&problem, u, {}});
  for (std::size_t i = 0; i < owner.size(); ++i) views.at(owner[i]).bands.push_back(i);
  return views;
}

}  // namespace

void AllocationProblem::validate() const {
  if (gains.values.size() != gains.ue_count * gains.band_count) throw std::invalid_argument("malformed gain table");
  if (gains.ue_count == 0 || gains.band_count == 0) throw std::invalid_argument("need at least one UE and one band");
  if (bands.size() != gains.band_count) throw std::invalid_argument("gain table and band list disagree");
  if (rate_requirements.size() != gains.ue_count) throw std::invalid_argument("one rate requirement per UE expected");
  if (!(p_max > 0.0) || !std::isfinite(p_max)) throw std::invalid_argument("p_max must be positive");
  for (double g : gains.values)
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("channel gains must be finite and >= 0");
  for (const auto& b : bands) b.validate();
}

std::vector<double> tight_auxiliary(const Assignment& assignment, const GainTable& gains) {
  std::vector<double> t(gains.ue_count * gains.band_count, 0.0);
  for (std::size_t i = 0; i < assignment.owner.size(); ++i) {
    const std::size_t u = assignment.owner[i];
    t[u * gains.band_count + i] = assignment.power[i] * gains(u, i);
  }
  return t;
}

std::vector<double> ue_rates(const AllocationProblem& problem, std::span<const std::size_t> owner,
                             std::span<const double> power) {
  std::vector<double> rates(problem.ue_count(), 0.0);
  for (std::size_t i = 0; i < owner.size(); ++i)
    rates[owner[i]] += subband_rate(problem.bands[i], power[i], problem.gains(owner[i], i));
  return rates;
}

PowerSolution solve_power(const AllocationProblem& problem, std::span<const std::size_t> owner) {
  const std::size_t n_ue = problem.ue_count();
  const std::size_t n_band = problem.band_count();
  if (owner.size() != n_band) throw std::invalid_argument("one owner per band expected");

  const auto views = split_by_owner(problem, owner);
  std::vector<double> floor_level(n_ue);
  double required = 0.0;
  for (std::size_t u = 0; u < n_ue; ++u) {
    floor_level[u] = min_water_level(views[u], problem.rate_requirements[u]);
    required += std::isfinite(floor_level[u]) ? views[u].power(floor_level[u]) : kInf;
  }

  PowerSolution out;
  out.power.assign(n_band, 0.0);
  out.duals.mu.assign(n_ue, 0.0);
  out.required_power = required;

  double lowest = kInf;
  for (const auto& v : views) lowest = std::min(lowest, v.lowest_activation());

  auto levels_for = [&](double common) {
    std::vector<double> nu(n_ue);
    for (std::size_t u = 0; u < n_ue; ++u) nu[u] = std::max(common, floor_level[u]);
    return nu;
  };
  auto total_power = [&](double common) {
    double p = 0.0;
    for (std::size_t u = 0; u < n_ue; ++u) p += views[u].power(std::max(common, floor_level[u]));
    return p;
  };

  if (!(required <= problem.p_max * (1.0 + 1e-12)) || !std::isfinite(lowest)) {
    // Either some floor is out of budget or no owned band has any gain.
    out.feasible = std::isfinite(lowest) ? false
                                         : std::all_of(problem.rate_requirements.begin(),
                                                       problem.rate_requirements.end(), [](double r) { return r <= 0.0; });
    if (std::isfinite(required) && required > 0.0) {
      const auto nu = levels_for(0.0);
      const double shrink = std::min(1.0, problem.p_max / required);
      for (std::size_t i = 0; i < n_band; ++i)
        out.power[i] = shrink * band_power(nu[owner[i]], problem.bands[i], problem.gains(owner[i], i));
    }
    const auto rates = ue_rates(problem, owner, out.power);
    out.sum_rate = std::accumulate(rates.begin(), rates.end(), 0.0);
    return out;
  }

  // Common water level spending the whole budget.
  double lo = 0.0;
  double hi = std::max(lowest, 1e-300);
  while (total_power(hi) < problem.p_max) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total_power(mid) <= problem.p_max ? lo : hi) = mid;
  }
  const double common = lo > 0.0 ? lo : hi;
  const auto nu = levels_for(common);
  for (std::size_t i = 0; i < n_band; ++i)
    out.power[i] = band_power(nu[owner[i]], problem.bands[i], problem.gains(owner[i], i));
  const double spent = std::accumulate(out.power.begin(), out.power.end(), 0.0);
  if (spent > problem.p_max)
    for (double& p : out.power) p *= problem.p_max / spent;

  out.duals.lambda = 1.0 / common;
  for (std::size_t u = 0; u < n_ue; ++u) out.duals.mu[u] = std::max(0.0, nu[u] / common - 1.0);

  const auto rates = ue_rates(problem, owner, out.power);
  out.sum_rate = std::accumulate(rates.begin(), rates.end(), 0.0);
  out.feasible = true;
  for (std::size_t u = 0; u < n_ue; ++u)
    if (rates[u] < problem.rate_requirements[u] * (1.0 - kRateSlack)) out.feasible = false;
  return out;
}

namespace {

bool better(const PowerSolution& a, const PowerSolution& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.sum_rate > b.sum_rate * (1.0 + 1e-12);
  return a.required_power < b.required_power * (1.0 - 1e-12);
}

// Each UE takes a distinct band in order of decreasing gain; leftover
// bands follow the strongest UE. Aims at feasibility when U <= I.
std::vector<std::size_t> greedy_matching(const AllocationProblem& problem) {
  const std::size_t n_ue = problem.ue_count();
  const std::size_t n_band = problem.band_count();
  std::vector<std::size_t> owner(n_band, 0);
  std::vector<bool> band_taken(n_band, false);
  std::vector<bool> ue_served(n_ue, false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < n_ue; ++u)
    for (std::size_t i = 0; i < n_band; ++i) pairs.emplace_back(u, i);
  std::stable_sort(pairs.begin(), pairs.end(), [&](auto a, auto b) {
    return problem.gains(a.first, a.second) > problem.gains(b.first, b.second);
  });
  for (auto [u, i] : pairs) {
    if (ue_served[u] || band_taken[i]) continue;
    owner[i] = u;
    ue_served[u] = band_taken[i] = true;
  }
  for (std::size_t i = 0; i < n_band; ++i) {
    if (band_taken[i]) continue;
    std::size_t best = 0;
    for (std::size_t u = 1; u < n_ue; ++u)
      if (problem.gains(u, i) > problem.gains(best, i)) best = u;
    owner[i] = best;
  }
  return owner;
}

}  // namespace

AllocationResult solve_allocation(const AllocationProblem& problem, const AllocationOptions& options,
                                  const std::vector<std::size_t>* incumbent) {
  problem.validate();
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("allocation tolerance must be positive");
  const std::size_t n_ue = problem.ue_count();
  const std::size_t n_band = problem.band_count();

  AllocationResult result;
  for (std::size_t u = 0; u < n_ue; ++u) {
    const std::vector<std::size_t> all_to_u(n_band, u);
    const auto views = split_by_owner(problem, all_to_u);
    const double level = min_water_level(views[u], problem.rate_requirements[u]);
    if (!std::isfinite(level) || views[u].power(level) > problem.p_max * (1.0 + 1e-12))
      result.provably_infeasible = true;
  }

  // Dual decomposition: per-band winner under prices (lambda, mu).
  double bandwidth_sum = 0.0;
  double inverse_gain_sum = 0.0;
  for (std::size_t i = 0; i < n_band; ++i) {
    bandwidth_sum += problem.bands[i].bandwidth_hz;
    double g_best = 0.0;
    for (std::size_t u = 0; u < n_ue; ++u) g_best = std::max(g_best, problem.gains(u, i));
    if (g_best > 0.0) inverse_gain_sum += 1.0 / (problem.bands[i].inverse_noise_power() * g_best);
  }
  const double lambda_ref = bandwidth_sum / (kLn2 * (problem.p_max + inverse_gain_sum));
  double lambda = lambda_ref;
  std::vector<double> mu(n_ue, 0.0);

  std::set<std::vector<std::size_t>> seen;
  constexpr std::size_t kMaxCandidates = 512;
  std::vector<std::size_t> owner(n_band);
  std::vector<double> power(n_band);
  int it = 1;
  for (; it <= options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n_band; ++i) {
      const SubBand& band = problem.bands[i];
      double best_benefit = -kInf;
      for (std::size_t u = 0; u < n_ue; ++u) {
        const double g = problem.gains(u, i);
        const double p = band_power((1.0 + mu[u]) / lambda, band, g);
        const double benefit = (1.0 + mu[u]) * subband_rate(band, p, g) - lambda * p;
        if (benefit > best_benefit) {
          best_benefit = benefit;
          owner[i] = u;
          power[i] = p;
        }
      }
    }
    if (seen.size() < kMaxCandidates) seen.insert(owner);

    const auto rates = ue_rates(problem, owner, power);
    const double power_residual = (std::accumulate(power.begin(), power.end(), 0.0) - problem.p_max) / problem.p_max;
    bool converged = std::abs(power_residual) <= options.tolerance;
    std::vector<double> rate_residual(n_ue);
    for (std::size_t u = 0; u < n_ue; ++u) {
      const double ref = problem.rate_requirements[u] > 0.0 ? problem.rate_requirements[u] : bandwidth_sum;
      rate_residual[u] = (problem.rate_requirements[u] - rates[u]) / ref;
      if (rate_residual[u] > options.tolerance || mu[u] * std::abs(rate_residual[u]) > options.tolerance)
        converged = false;
    }
    if (converged) break;

    const double step = options.step / std::sqrt(static_cast<double>(it));
    lambda = std::max(1e-9 * lambda_ref, lambda + step * lambda_ref * power_residual);
    for (std::size_t u = 0; u < n_ue; ++u) mu[u] = std::max(0.0, mu[u] + step * rate_residual[u]);
  }
  result.dual_iterations = std::min(it, options.max_iterations);

  // Primal recovery: exact power for every assignment the duals visited,
  // plus a few structural candidates, then single-band reassignment and pairwise swap moves.
  std::vector<std::vector<std::size_t>> candidates(seen.begin(), seen.end());
  if (incumbent && incumbent->size() == n_band) candidates.push_back(*incumbent);
  {
    std::vector<std::size_t> strongest(n_band, 0);
    for (std::size_t i = 0; i < n_band; ++i)
      for (std::size_t u = 1; u < n_ue; ++u)
        if (problem.gains(u, i) > problem.gains(strongest[i], i)) strongest[i] = u;
    candidates.push_back(std::move(strongest));
  }
  candidates.push_back(greedy_matching(problem));

  // Small problems: every owner map, so the result is the global optimum.
  std::size_t map_count = 1;
  for (std::size_t i = 0; i < n_band && map_count <= options.exhaustive_limit; ++i) map_count *= n_ue;
  const bool exhaustive = map_count <= options.exhaustive_limit;
  if (exhaustive) {
    std::vector<std::size_t> digits(n_band, 0);
    for (std::size_t m = 0; m < map_count; ++m) {
      candidates.push_back(digits);
      for (std::size_t i = 0; i < n_band && ++digits[i] == n_ue; ++i) digits[i] = 0;
    }
  }

  std::vector<std::size_t> best_owner = candidates.front();
  PowerSolution best = solve_power(problem, best_owner);
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    PowerSolution trial = solve_power(problem, candidates[c]);
    if (better(trial, best)) {
      best = std::move(trial);
      best_owner = candidates[c];
    }
  }

  for (int pass = 0; pass < 100 && !exhaustive; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < n_band; ++i) {
      for (std::size_t u = 0; u < n_ue; ++u) {
        if (u == best_owner[i]) continue;
        auto trial_owner = best_owner;
        trial_owner[i] = u;
        PowerSolution trial = solve_power(problem, trial_owner);
        if (better(trial, best)) {
          best = std::move(trial);
          best_owner = std::move(trial_owner);
          improved = true;
        }
      }
    }
    // Swaps matter once floors pin every UE to at least one band.
    for (std::size_t i = 0; i < n_band; ++i) {
      for (std::size_t j = i + 1; j < n_band; ++j) {
        if (best_owner[i] == best_owner[j]) continue;
        auto trial_owner = best_owner;
        std::swap(trial_owner[i], trial_owner[j]);
        PowerSolution trial = solve_power(problem, trial_owner);
        if (better(trial, best)) {
          best = std::move(trial);
          best_owner = std::move(trial_owner);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }

  result.assignment.owner = best_owner;
  result.assignment.power = best.power;
  result.assignment.auxiliary = tight_auxiliary(result.assignment, problem.gains);
  result.duals = best.duals;
  result.rates = ue_rates(problem, best_owner, best.power);
  result.sum_rate = best.sum_rate;
  result.feasible = best.feasible && !result.provably_infeasible;
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct GridBest {
  double sum_rate = -kInf;
  std::vector<double> power;
  bool found = false;
};

// Every power split on the grid for one owner map.
GridBest search_owner(const AllocationProblem& problem, std::span<const std::size_t> owner,
                      const std::vector<std::vector<double>>& table, const std::vector<double>& last_table,
                      std::size_t units, double step, double remainder) {
  const std::size_t n_band = problem.band_count();
  const std::size_t n_ue = problem.ue_count();
  GridBest best;
  std::vector<std::size_t> k(n_band, 0);
  std::vector<double> rate(n_ue);

  // odometer over k_0..k_{I-2} with sum <= units
  while (true) {
    std::size_t used = 0;
    for (std::size_t i = 0; i + 1 < n_band; ++i) used += k[i];
    if (used <= units) {
      std::fill(rate.begin(), rate.end(), 0.0);
      for (std::size_t i = 0; i + 1 < n_band; ++i) rate[owner[i]] += table[owner[i] * n_band + i][k[i]];
      const std::size_t last = n_band - 1;
      rate[owner[last]] += last_table[owner[last] * (units + 1) + (units - used)];
      bool ok = true;
      double total = 0.0;
      for (std::size_t u = 0; u < n_ue; ++u) {
        if (rate[u] < problem.rate_requirements[u] * (1.0 - kRateSlack)) ok = false;
        total += rate[u];
      }
      if (ok && total > best.sum_rate) {
        best.sum_rate = total;
        best.found = true;
        best.power.assign(n_band, 0.0);
        for (std::size_t i = 0; i + 1 < n_band; ++i) best.power[i] = static_cast<double>(k[i]) * step;
        best.power[last] = static_cast<double>(units - used) * step + remainder;
      }
    }
    std::size_t pos = 0;
    while (pos + 1 < n_band) {
      if (++k[pos] <= units) break;
      k[pos] = 0;
      ++pos;
    }
    if (pos + 1 >= n_band) break;
  }
  return best;
}

}  // namespace

AllocationResult brute_force_allocation(const AllocationProblem& problem, double power_grid_step,
                                        ExecPolicy policy) {
  problem.validate();
  if (problem.ue_count() > 3 || problem.band_count() > 4)
    throw std::invalid_argument("exhaustive allocation refused: at most 3 UEs and 4 bands");
  if (!(power_grid_step > 0.0)) throw std::invalid_argument("power grid step must be positive");

  const std::size_t n_ue = problem.ue_count();
  const std::size_t n_band = problem.band_count();
  const auto units = static_cast<std::size_t>(std::floor(problem.p_max / power_grid_step + 1e-9));
  const double remainder = std::max(0.0, problem.p_max - static_cast<double>(units) * power_grid_step);

  std::vector<std::vector<double>> table(n_ue * n_band, std::vector<double>(units + 1));
  std::vector<double> last_table(n_ue * (units + 1));
  for (std::size_t u = 0; u < n_ue; ++u) {
    for (std::size_t i = 0; i < n_band; ++i)
      for (std::size_t k = 0; k <= units; ++k)
        table[u * n_band + i][k] =
            subband_rate(problem.bands[i], static_cast<double>(k) * power_grid_step, problem.gains(u, i));
    for (std::size_t k = 0; k <= units; ++k)
      last_table[u * (units + 1) + k] = subband_rate(
          problem.bands[n_band - 1], static_cast<double>(k) * power_grid_step + remainder, problem.gains(u, n_band - 1));
  }

  std::size_t owner_maps = 1;
  for (std::size_t i = 0; i < n_band; ++i) owner_maps *= n_ue;
  auto owner_of = [&](std::size_t index) {
    std::vector<std::size_t> owner(n_band);
    for (std::size_t i = n_band; i-- > 0;) {
      owner[i] = index % n_ue;
      index /= n_ue;
    }
    return owner;
  };

  std::vector<GridBest> per_owner(owner_maps);
  const auto count = static_cast<long long>(owner_maps);
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long m = 0; m < count; ++m)
      per_owner[m] = search_owner(problem, owner_of(m), table, last_table, units, power_grid_step, remainder);
  } else {
    for (long long m = 0; m < count; ++m)
      per_owner[m] = search_owner(problem, owner_of(m), table, last_table, units, power_grid_step, remainder);
  }

  AllocationResult result;
  std::size_t best_index = 0;
  bool found = false;
  for (std::size_t m = 0; m < owner_maps; ++m) {
    if (per_owner[m].found && (!found || per_owner[m].sum_rate > per_owner[best_index].sum_rate)) {
      best_index = m;
      found = true;
    }
  }
  result.assignment.owner = owner_of(best_index);
  if (found) {
    result.assignment.power = per_owner[best_index].power;
  } else {
    result.assignment.power.assign(n_band, problem.p_max / static_cast<double>(n_band));
  }
  result.assignment.auxiliary = tight_auxiliary(result.assignment, problem.gains);
  result.rates = ue_rates(problem, result.assignment.owner, result.assignment.power);
  result.sum_rate = std::accumulate(result.rates.begin(), result.rates.end(), 0.0);
  result.feasible = found;
  return result;
}

}  // namespace thz
