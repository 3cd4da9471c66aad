// SPDX-License-Identifier: Apache-2.0
//
// Slow, obviously-correct reference computations the solvers are checked
// against. Nothing here shares code paths with the library beyond the
// plain data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "thzirs/allocation.hpp"
#include "thzirs/geometry.hpp"
#include "thzirs/phase_opt.hpp"
#include "thzirs/rng.hpp"

namespace oracle {

inline constexpr double kC = 299792458.0;
inline constexpr double kPi = std::numbers::pi;

// |sum_n exp(j(phi_n - lag_n))|^2 with the lags written out from the
// element positions.
inline double array_factor(double f, const thz::IrsPlacement& irs, const thz::Scene& scene, std::size_t ue,
                           const std::vector<double>& phases) {
  const double h = scene.ceiling_height_m;
  const thz::Vec3& ap = scene.ap;
  const thz::Vec3& w = scene.ues[ue];
  const double r0 = std::sqrt((irs.x - ap.x) * (irs.x - ap.x) + (irs.y - ap.y) * (irs.y - ap.y) + (h - ap.z) * (h - ap.z));
  const double ru = std::sqrt((w.x - irs.x) * (w.x - irs.x) + (w.y - irs.y) * (w.y - irs.y) + (w.z - h) * (w.z - h));
  std::complex<double> s = 0.0;
  for (std::size_t n = 0; n < irs.element_count; ++n) {
    const double offset = static_cast<double>(n) * irs.spacing_m;
    const double lag = 2.0 * kPi * f / kC * offset * ((irs.y - ap.y) / r0 + (w.y - irs.y) / ru);
    s += std::exp(std::complex<double>(0.0, phases[n] - lag));
  }
  return std::norm(s);
}

// Specular point on the ceiling for AP -> IRS -> UE.
inline std::pair<double, double> mirror_point(const thz::Vec3& ap, const thz::Vec3& ue, double ceiling) {
  const double s = (ceiling - ap.z) / (2.0 * ceiling - ue.z - ap.z);
  return {ap.x + s * (ue.x - ap.x), ap.y + s * (ue.y - ap.y)};
}

inline double total_distance(const thz::Scene& scene, double x, double y) {
  const double h = scene.ceiling_height_m;
  auto dist = [&](const thz::Vec3& p) { return std::sqrt((x - p.x) * (x - p.x) + (y - p.y) * (y - p.y) + (h - p.z) * (h - p.z)); };
  double s = 0.0;
  for (const auto& w : scene.ues) s += dist(scene.ap) + dist(w);
  return s;
}

// Dense grid search of the summed path length; returns the arg-min.
inline std::pair<double, double> grid_min_distance(const thz::Scene& scene, const thz::PlacementBox& box,
                                                   double step) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{box.x_min, box.y_min};
  const auto nx = static_cast<std::size_t>(std::floor((box.x_max - box.x_min) / step + 1e-9));
  const auto ny = static_cast<std::size_t>(std::floor((box.y_max - box.y_min) / step + 1e-9));
  for (std::size_t a = 0; a <= nx; ++a) {
    for (std::size_t b = 0; b <= ny; ++b) {
      const double x = box.x_min + static_cast<double>(a) * step;
      const double y = box.y_min + static_cast<double>(b) * step;
      const double v = total_distance(scene, x, y);
      if (v < best) {
        best = v;
        arg = {x, y};
      }
    }
  }
  return arg;
}

// Every phase vector on an L-level grid (element 0 included); the best
// min normalized slack of |e_k . phi|^2 - t_k.
struct QuantizedBest {
  double min_normalized_slack = -std::numeric_limits<double>::infinity();
  std::vector<double> phases;
};

inline QuantizedBest quantized_max_min(std::span<const thz::EffectiveVector> links, std::span<const double> targets,
                                       std::size_t levels = 8) {
  const std::size_t n = links.front().size();
  std::vector<std::complex<double>> steps(levels);
  for (std::size_t l = 0; l < levels; ++l) steps[l] = std::polar(1.0, 2.0 * kPi * static_cast<double>(l) / static_cast<double>(levels));
  QuantizedBest best;
  std::vector<std::size_t> digit(n, 0);
  while (true) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < links.size(); ++k) {
      std::complex<double> w = 0.0;
      double peak = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        w += links[k].entries[m] * steps[digit[m]];
        peak += std::abs(links[k].entries[m]);
      }
      worst = std::min(worst, (std::norm(w) - targets[k]) / (peak * peak));
    }
    if (worst > best.min_normalized_slack) {
      best.min_normalized_slack = worst;
      best.phases.resize(n);
      for (std::size_t m = 0; m < n; ++m) best.phases[m] = 2.0 * kPi * static_cast<double>(digit[m]) / static_cast<double>(levels);
    }
    std::size_t pos = 0;
    while (pos < n && ++digit[pos] == levels) digit[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

inline thz::EffectiveVector random_effective_vector(thz::SplitMix64& rng, std::size_t n, double scale = 1.0) {
  thz::EffectiveVector e;
  e.entries.resize(n);
  for (auto& v : e.entries) v = std::polar(scale * rng.uniform(0.1, 1.0), rng.uniform(0.0, 2.0 * kPi));
  return e;
}

inline thz::PhaseVector random_phases(thz::SplitMix64& rng, std::size_t n) {
  std::vector<double> a(n);
  for (double& v : a) v = rng.uniform(0.0, 2.0 * kPi);
  return thz::PhaseVector(std::move(a));
}

// Same search on the linear minorant 2Re{theta_k . phi} - psi_k >= t_k,
// normalized by each link's scale.
inline double surrogate_quantized_max_min(const thz::Surrogate& s, std::span<const double> targets,
                                          std::size_t levels = 8) {
  const std::size_t n = s.anchor.size();
  std::vector<std::complex<double>> steps(levels);
  for (std::size_t l = 0; l < levels; ++l) steps[l] = std::polar(1.0, 2.0 * kPi * static_cast<double>(l) / static_cast<double>(levels));
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> digit(n, 0);
  while (true) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.size(); ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) acc += s.terms[k].theta[m] * steps[digit[m]];
      worst = std::min(worst, (2.0 * acc.real() - s.terms[k].psi - targets[k]) / s.terms[k].scale);
    }
    best = std::max(best, worst);
    std::size_t pos = 0;
    while (pos < n && ++digit[pos] == levels) digit[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

// Random surrogate problem: 2..4 links over 1..4 elements, targets drawn
// below each link's surrogate maximum.
struct SurrogateInstance {
  std::vector<thz::EffectiveVector> links;
  thz::Surrogate surrogate;
  std::vector<double> targets;
};

inline SurrogateInstance random_surrogate_instance(thz::SplitMix64& rng) {
  const auto k_count = 2 + static_cast<std::size_t>(rng.next() % 3);
  const auto n = 1 + static_cast<std::size_t>(rng.next() % 4);
  SurrogateInstance out;
  for (std::size_t k = 0; k < k_count; ++k) out.links.push_back(random_effective_vector(rng, n, rng.uniform(0.1, 3.0)));
  out.surrogate = thz::build_surrogate(out.links, random_phases(rng, n));
  const double squeeze = rng.uniform(0.3, 1.0);
  for (const auto& term : out.surrogate.terms) {
    double theta_sum = 0.0;
    for (const auto& v : term.theta) theta_sum += std::abs(v);
    out.targets.push_back(rng.uniform() * squeeze * (2.0 * theta_sum - term.psi));
  }
  return out;
}

// Allocation instance with per-watt SNRs between about 0.5 and 50 on
// 50 GHz bands. `floor_share` scales each UE's rate floor against the
// rate of its best band at an equal share of the budget (0 = no floors).
inline thz::AllocationProblem random_allocation_problem(thz::SplitMix64& rng, std::size_t ues, std::size_t bands,
                                                        double floor_share) {
  thz::AllocationProblem p;
  p.p_max = rng.uniform(0.5, 2.0);
  for (std::size_t i = 0; i < bands; ++i)
    p.bands.push_back({250e9 + 50e9 * static_cast<double>(i), 50e9, 3.9810717055349855e-20});
  p.gains = thz::GainTable(ues, bands);
  for (std::size_t u = 0; u < ues; ++u)
    for (std::size_t i = 0; i < bands; ++i) {
      const double noise = p.bands[i].noise_psd_w_per_hz * p.bands[i].bandwidth_hz;
      p.gains(u, i) = noise * std::exp(rng.uniform(std::log(0.5), std::log(50.0)));
    }
  for (std::size_t u = 0; u < ues; ++u) {
    double best = 0.0;
    for (std::size_t i = 0; i < bands; ++i)
      best = std::max(best, thz::subband_rate(p.bands[i], p.p_max / static_cast<double>(ues), p.gains(u, i)));
    p.rate_requirements.push_back(floor_share * rng.uniform() * best);
  }
  return p;
}

}  // namespace oracle
