// SPDX-License-Identifier: Apache-2.0

#include "thzirs/phase_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace thz {

double EffectiveVector::peak_power() const {
  double s = 0.0;
  for (const auto& v : entries) s += std::abs(v);
  return s * s;
}

EffectiveVector effective_vector(const SubBand& band, const Medium& medium, double power_w,
                                 const IrsPlacement& placement, const Scene& scene, std::size_t ue) {
  if (!(power_w >= 0.0)) throw std::domain_error("power must be non-negative");
  const double f = band.center_hz;
  const std::complex<double> g =
      std::sqrt(power_w) * cascaded_gain(f, path_length(placement, scene, ue), medium.absorption(f));
  EffectiveVector e;
  e.entries.resize(placement.element_count);
  for (std::size_t n = 0; n < placement.element_count; ++n) {
    const double lag =
        incident_steering_phase(f, placement, scene, n) + departure_steering_phase(f, placement, scene, ue, n);
    e.entries[n] = g * std::polar(1.0, -lag);
  }
  return e;
}

std::complex<double> combine(const EffectiveVector& e, const PhaseVector& phases) {
  if (e.size() != phases.size()) throw std::invalid_argument("effective vector and phases differ in length");
  std::complex<double> w = 0.0;
  for (std::size_t n = 0; n < e.size(); ++n) w += e.entries[n] * phases.coefficient(n);
  return w;
}

double Surrogate::value(std::size_t k, const PhaseVector& phases) const {
  const auto& term = terms[k];
  std::complex<double> s = 0.0;
  for (std::size_t n = 0; n < term.theta.size(); ++n) s += term.theta[n] * phases.coefficient(n);
  return 2.0 * s.real() - term.psi;
}

Surrogate build_surrogate(std::span<const EffectiveVector> links, const PhaseVector& anchor) {
  Surrogate out;
  out.anchor = anchor;
  out.terms.reserve(links.size());
  for (const auto& e : links) {
    const std::complex<double> w_hat = combine(e, anchor);
    SurrogateTerm term;
    term.theta.resize(e.size());
    for (std::size_t n = 0; n < e.size(); ++n) term.theta[n] = std::conj(w_hat) * e.entries[n];
    term.psi = std::norm(w_hat);
    term.scale = e.peak_power();
    out.terms.push_back(std::move(term));
  }
  return out;
}

PhaseUpdate penalized_phase_update(const Surrogate& surrogate, std::span<const double> prices) {
  if (prices.size() != surrogate.size()) throw std::invalid_argument("one price per surrogate term expected");
  const std::size_t n_elements = surrogate.anchor.size();
  if (std::all_of(prices.begin(), prices.end(), [](double r) { return r <= 0.0; }))
    return {surrogate.anchor, true};

  std::vector<double> angles(n_elements);
  for (std::size_t n = 0; n < n_elements; ++n) {
    std::complex<double> c = 0.0;
    for (std::size_t k = 0; k < surrogate.size(); ++k) c += 2.0 * prices[k] * surrogate.terms[k].theta[n];
    // Re{c Gamma} peaks at Gamma = exp(-j arg c).
    angles[n] = c == 0.0 ? surrogate.anchor.angle(n) : -std::arg(c);
  }
  return {PhaseVector(std::move(angles)), false};
}

PricingState price_update(const PricingState& state, const Surrogate& surrogate, const PhaseVector& phases,
                          std::span<const double> targets) {
  if (state.prices.size() != surrogate.size() || state.step_sizes.size() != surrogate.size() ||
      targets.size() != surrogate.size())
    throw std::invalid_argument("pricing state, targets and surrogate differ in size");
  PricingState next = state;
  for (std::size_t k = 0; k < surrogate.size(); ++k) {
    if (!(state.step_sizes[k] > 0.0)) throw std::invalid_argument("price step sizes must be positive");
    const double residual = surrogate.value(k, phases) - targets[k];
    next.prices[k] = std::max(0.0, state.prices[k] - state.step_sizes[k] * residual);
  }
  ++next.iteration;
  return next;
}

namespace {

// Step sizes go as 1/peak^2, so anything this small counts as a dead link.
double link_scale(double peak) { return peak > 1e-150 ? peak : 1.0; }

struct SlackSummary {
  std::vector<double> raw;
  double min_normalized = std::numeric_limits<double>::infinity();
};

SlackSummary surrogate_slack(const Surrogate& s, std::span<const double> targets, const PhaseVector& phases) {
  SlackSummary out;
  out.raw.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    out.raw[k] = s.value(k, phases) - targets[k];
    out.min_normalized = std::min(out.min_normalized, out.raw[k] / link_scale(s.terms[k].scale));
  }
  return out;
}

// max over x of min_k a_k + Re{b_k e^{jx}}. The optimum sits either at
// some sinusoid's own peak or where two sinusoids cross.
std::pair<double, double> best_single_phase(std::span<const double> a, std::span<const std::complex<double>> b) {
  const std::size_t k_count = a.size();
  auto min_at = [&](double x) {
    const std::complex<double> rot = std::polar(1.0, x);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_count; ++k) m = std::min(m, a[k] + (b[k] * rot).real());
    return m;
  };
  double best_x = 0.0;
  double best_v = -std::numeric_limits<double>::infinity();
  auto consider = [&](double x) {
    const double v = min_at(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  };
  for (std::size_t k = 0; k < k_count; ++k) consider(b[k] == 0.0 ? 0.0 : -std::arg(b[k]));
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = k + 1; l < k_count; ++l) {
      // Re{(b_k - b_l) e^{jx}} = a_l - a_k
      const std::complex<double> d = b[k] - b[l];
      const double mag = std::abs(d);
      const double rhs = a[l] - a[k];
      if (mag == 0.0 || std::abs(rhs) > mag) continue;
      const double base = -std::arg(d);
      const double spread = std::acos(std::clamp(rhs / mag, -1.0, 1.0));
      consider(base + spread);
      consider(base - spread);
    }
  }
  return {best_x, best_v};
}

// Coordinate ascent on min_k normalized surrogate slack; each element's
// sub-problem is solved exactly. Never decreases the min slack.
PhaseVector polish_min_slack(const Surrogate& s, std::span<const double> targets, PhaseVector phases) {
  const std::size_t k_count = s.size();
  const std::size_t n_count = phases.size();
  if (k_count == 0 || n_count == 0) return phases;

  std::vector<double> inv_scale(k_count);
  for (std::size_t k = 0; k < k_count; ++k) inv_scale[k] = 1.0 / link_scale(s.terms[k].scale);

  std::vector<double> angles = phases.angles();
  // current[k] = sum_n theta_kn Gamma_n
  std::vector<std::complex<double>> current(k_count, 0.0);
  for (std::size_t k = 0; k < k_count; ++k)
    for (std::size_t n = 0; n < n_count; ++n) current[k] += s.terms[k].theta[n] * std::polar(1.0, angles[n]);
  auto min_slack = [&] {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_count; ++k)
      m = std::min(m, (2.0 * current[k].real() - s.terms[k].psi - targets[k]) * inv_scale[k]);
    return m;
  };

  std::vector<double> a(k_count);
  std::vector<std::complex<double>> b(k_count);
  double value = min_slack();
  constexpr int kMaxSweeps = 50;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double start = value;
    for (std::size_t n = 0; n < n_count; ++n) {
      const std::complex<double> gamma = std::polar(1.0, angles[n]);
      for (std::size_t k = 0; k < k_count; ++k) {
        const std::complex<double> rest = current[k] - s.terms[k].theta[n] * gamma;
        a[k] = (2.0 * rest.real() - s.terms[k].psi - targets[k]) * inv_scale[k];
        b[k] = 2.0 * s.terms[k].theta[n] * inv_scale[k];
      }
      const auto [x, v] = best_single_phase(a, b);
      if (v > value) {
        const std::complex<double> next = std::polar(1.0, x);
        for (std::size_t k = 0; k < k_count; ++k) current[k] += s.terms[k].theta[n] * (next - gamma);
        angles[n] = x;
        value = min_slack();  // recompute; guards against drift in `current`
      }
    }
    if (!(value - start > 1e-15 * std::max(1.0, std::abs(value)))) break;
  }
  return PhaseVector(std::move(angles));
}

}  // namespace

SgdResult sgd_solve(const Surrogate& surrogate, std::span<const double> targets, const SgdOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("SGD tolerance must be positive");
  if (targets.size() != surrogate.size()) throw std::invalid_argument("one target per surrogate term expected");
  const std::size_t k_count = surrogate.size();

  SgdResult result;
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto& term = surrogate.terms[k];
    double theta_sum = 0.0;
    for (const auto& v : term.theta) theta_sum += std::abs(v);
    const double ceiling = 2.0 * theta_sum - term.psi;
    if (targets[k] > ceiling + 1e-12 * std::max(std::abs(ceiling), link_scale(term.scale)))
      result.provably_infeasible = true;
  }

  // Prices act on constraints normalized by their achievable peak.
  PricingState pricing;
  pricing.prices.resize(k_count);
  pricing.step_sizes.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) pricing.prices[k] = 1.0 / link_scale(surrogate.terms[k].scale);

  PhaseVector best = surrogate.anchor;
  double best_slack = surrogate_slack(surrogate, targets, best).min_normalized;
  PhaseVector previous = surrogate.anchor;

  // Nothing to restore: the anchor already clears every constraint with margin.
  const bool anchor_inside = k_count > 0 && best_slack > options.feasibility_tolerance;

  int it = 1;
  for (; !anchor_inside && it <= options.max_iterations && k_count > 0; ++it) {
    const PhaseUpdate update = penalized_phase_update(surrogate, pricing.prices);
    if (update.prices_vanished) {
      result.converged = true;
      break;
    }
    const SlackSummary slack = surrogate_slack(surrogate, targets, update.phases);
    if (slack.min_normalized > best_slack) {
      best_slack = slack.min_normalized;
      best = update.phases;
    }
    const double decay = 1.0 / std::sqrt(static_cast<double>(it));
    for (std::size_t k = 0; k < k_count; ++k) {
      const double scale = link_scale(surrogate.terms[k].scale);
      pricing.step_sizes[k] = decay / (scale * scale);
    }
    pricing = price_update(pricing, surrogate, update.phases, targets);

    // Settled phases only count as convergence once every constraint holds;
    // otherwise the prices are still moving towards a different maximiser.
    const bool settled = phase_distance(update.phases, previous) <= options.tolerance;
    if (settled && slack.min_normalized >= 0.0) {
      result.converged = true;
      break;
    }
    previous = update.phases;
  }
  result.iterations = anchor_inside ? 0 : std::min(it, options.max_iterations);
  if (anchor_inside) result.converged = true;

  if (options.polish && k_count > 0 && !anchor_inside) {
    best = polish_min_slack(surrogate, targets, best);
    result.polished = true;
  }

  const SlackSummary final_slack = surrogate_slack(surrogate, targets, best);
  result.phases = best;
  result.slack = final_slack.raw;
  result.min_normalized_slack = k_count > 0 ? final_slack.min_normalized : 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double violation = std::max(0.0, -final_slack.raw[k]);
    const double ref = targets[k] > 0.0 ? targets[k] : link_scale(surrogate.terms[k].scale);
    worst = std::max(worst, violation / ref);
  }
  result.max_relative_violation = worst;
  result.feasible = worst <= options.feasibility_tolerance;
  return result;
}

std::vector<double> normalized_slack(std::span<const EffectiveVector> links, std::span<const double> targets,
                                     const PhaseVector& phases) {
  if (links.size() != targets.size()) throw std::invalid_argument("one target per link expected");
  std::vector<double> out(links.size());
  for (std::size_t k = 0; k < links.size(); ++k)
    out[k] = (received_power(links[k], phases) - targets[k]) / link_scale(links[k].peak_power());
  return out;
}

double min_normalized_slack(std::span<const EffectiveVector> links, std::span<const double> targets,
                            const PhaseVector& phases) {
  const auto s = normalized_slack(links, targets, phases);
  return s.empty() ? 0.0 : *std::min_element(s.begin(), s.end());
}

ScaResult sca_phase_optimize(std::span<const EffectiveVector> links, std::span<const double> targets,
                             const PhaseVector& anchor, const ScaOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("SCA tolerance must be positive");
  ScaResult result;
  result.phases = anchor;
  double current = min_normalized_slack(links, targets, anchor);
  result.min_slack_trace.push_back(current);

  for (int s = 1; s <= options.max_outer; ++s) {
    const Surrogate surrogate = build_surrogate(links, result.phases);
    const SgdResult inner = sgd_solve(surrogate, targets, options.sgd);
    const double next = min_normalized_slack(links, targets, inner.phases);
    result.outer_iterations = s;
    // The minorant is tight at the anchor, so a drop can only be rounding.
    if (next < current) {
      result.converged = true;
      break;
    }
    const double moved = phase_distance(inner.phases, result.phases);
    result.phases = inner.phases;
    current = next;
    result.min_slack_trace.push_back(current);
    if (moved <= options.tolerance) {
      result.converged = true;
      break;
    }
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < links.size(); ++k) {
    const double v = received_power(links[k], result.phases);
    const double ref = targets[k] > 0.0 ? targets[k] : link_scale(links[k].peak_power());
    worst = std::max(worst, std::max(0.0, targets[k] - v) / ref);
  }
  result.feasible = worst <= options.sgd.feasibility_tolerance;
  return result;
}

}  // namespace thz
