// SPDX-License-Identifier: Apache-2.0
//
// Multi-UE IRS phase design. Each active (UE, sub-band) link k carries a
// received-power target t_k; the phase stage keeps |e_k . phi|^2 >= t_k
// while pushing the smallest normalized slack up, by successive
// first-order (Taylor) under-estimators solved with a pricing scheme.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "thzirs/channel.hpp"
#include "thzirs/geometry.hpp"

namespace thz {

using ComplexRow = std::vector<std::complex<double>>;

/// sqrt(p) * g * exp(-j(theta_n + vartheta_n)) for every element n, so that
/// the received amplitude is e . phi = sum_n e_n Gamma_n.
struct EffectiveVector {
  ComplexRow entries;

  [[nodiscard]] std::size_t size() const { return entries.size(); }
  /// (sum_n |e_n|)^2, the largest |e . phi|^2 over unit-modulus phi.
  [[nodiscard]] double peak_power() const;
};

EffectiveVector effective_vector(const SubBand& band, const Medium& medium, double power_w,
                                 const IrsPlacement& placement, const Scene& scene, std::size_t ue);

std::complex<double> combine(const EffectiveVector& e, const PhaseVector& phases);
inline double received_power(const EffectiveVector& e, const PhaseVector& phases) {
  return std::norm(combine(e, phases));
}

/// Linear minorant of |e . phi|^2 anchored at phi_hat:
///   2 Re{theta . phi} - psi,  theta = conj(e . phi_hat) e,  psi = |e . phi_hat|^2.
struct SurrogateTerm {
  ComplexRow theta;
  double psi = 0.0;
  double scale = 0.0;  // peak_power() of the underlying link; 0 for a dead link
};

struct Surrogate {
  std::vector<SurrogateTerm> terms;
  PhaseVector anchor;

  [[nodiscard]] std::size_t size() const { return terms.size(); }
  [[nodiscard]] double value(std::size_t k, const PhaseVector& phases) const;
};

Surrogate build_surrogate(std::span<const EffectiveVector> links, const PhaseVector& anchor);

/// Maximiser of the priced penalty sum_k rho_k 2Re{theta_k . phi} over
/// unit-modulus phi. With every price at zero the objective does not
/// depend on phi; the anchor is returned and `prices_vanished` is set.
struct PhaseUpdate {
  PhaseVector phases;
  bool prices_vanished = false;
};

PhaseUpdate penalized_phase_update(const Surrogate& surrogate, std::span<const double> prices);

struct PricingState {
  std::vector<double> prices;
  std::vector<double> step_sizes;  // tau_k for the next update
  int iteration = 0;
};

/// rho_k <- [rho_k - tau_k (2Re{theta_k . phi} - psi_k - t_k)]^+
PricingState price_update(const PricingState& state, const Surrogate& surrogate, const PhaseVector& phases,
                          std::span<const double> targets);

struct SgdOptions {
  double tolerance = 1e-4;  // on phase_distance between iterates
  int max_iterations = 500;
  bool polish = true;
  double feasibility_tolerance = 1e-6;  // relative to each target
};

struct SgdResult {
  PhaseVector phases;
  std::vector<double> slack;  // surrogate value - target, per link
  double min_normalized_slack = 0.0;
  double max_relative_violation = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
  bool provably_infeasible = false;  // some target exceeds the surrogate's maximum
  bool polished = false;
};

/// Alternates the priced phase update and the price update, then polishes
/// the best iterate by exact element-wise max-min of the normalized slacks.
/// An anchor that already clears every constraint by more than the
/// feasibility tolerance is returned as is.
SgdResult sgd_solve(const Surrogate& surrogate, std::span<const double> targets, const SgdOptions& options = {});

/// Normalized slack of each true constraint, (|e_k . phi|^2 - t_k) / peak_k.
std::vector<double> normalized_slack(std::span<const EffectiveVector> links, std::span<const double> targets,
                                     const PhaseVector& phases);
double min_normalized_slack(std::span<const EffectiveVector> links, std::span<const double> targets,
                            const PhaseVector& phases);

struct ScaOptions {
  double tolerance = 1e-4;
  int max_outer = 50;
  SgdOptions sgd;
};

struct ScaResult {
  PhaseVector phases;
  std::vector<double> min_slack_trace;  // true min normalized slack, anchor first
  int outer_iterations = 0;
  bool converged = false;
  bool feasible = false;
};

/// Successive re-anchoring of the surrogate until the phases settle.
ScaResult sca_phase_optimize(std::span<const EffectiveVector> links, std::span<const double> targets,
                             const PhaseVector& anchor, const ScaOptions& options = {});

}  // namespace thz
