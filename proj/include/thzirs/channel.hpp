// SPDX-License-Identifier: Apache-2.0
//
// Terahertz propagation model: water-vapour absorption, cascaded
// AP -> IRS -> UE gain and per-sub-band Shannon rate.

#pragma once

#include <complex>
#include <cstddef>

#include "thzirs/geometry.hpp"

namespace thz {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

/// Atmospheric state feeding the absorption model.
struct Atmosphere {
  double temperature_c = 23.0;
  double pressure_hpa = 1013.25;
  double relative_humidity_pct = 50.0;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// One flat slice of spectrum carrying a single UE's signal.
struct SubBand {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double noise_psd_w_per_hz = 0.0;

  /// 1 / (S_N * B): the SNR per watt of received power.
  [[nodiscard]] double inverse_noise_power() const { return 1.0 / (noise_psd_w_per_hz * bandwidth_hz); }
  void validate() const;

  /// Thermal floor (dBm/Hz) raised by a receiver noise figure (dB).
  static SubBand with_thermal_noise(double center_hz, double bandwidth_hz,
                                    double noise_figure_db = 10.0,
                                    double thermal_dbm_per_hz = -174.0);
};

double dbm_per_hz_to_w_per_hz(double dbm_per_hz);

// Buck equation; returns hPa. Throws std::domain_error on non-finite input.
double saturated_vapor_pressure(double temperature_c, double pressure_hpa);

// Volume mixing ratio of water vapour (dimensionless).
double water_vapor_mixing_ratio(const Atmosphere& atmosphere);

/// How the two resonance detuning terms enter the denominators.
/// `Squared` gives Lorentzian lines; `AsPrinted` keeps the linear form
/// for compatibility and has sign-changing poles.
enum class DetuningModel { Squared, AsPrinted };

struct Absorption {
  double per_m = 0.0;
  bool in_validity_window = true;  // 200-400 GHz
};

inline constexpr double kAbsorptionModelMinHz = 200e9;
inline constexpr double kAbsorptionModelMaxHz = 400e9;

Absorption absorption_coefficient(double frequency_hz, double mixing_ratio,
                                  DetuningModel model = DetuningModel::Squared);

/// Propagation medium: a mixing ratio plus the line-shape choice.
struct Medium {
  double mixing_ratio = 0.0;
  DetuningModel detuning = DetuningModel::Squared;

  static Medium from_atmosphere(const Atmosphere& atmosphere,
                                DetuningModel detuning = DetuningModel::Squared);
  [[nodiscard]] double absorption(double frequency_hz) const {
    return absorption_coefficient(frequency_hz, mixing_ratio, detuning).per_m;
  }
};

/// Cascaded NLoS amplitude gain over total path length d:
///   g = c/(4 pi f d) * exp(-j 2 pi f d / c) * exp(-K d / 2)
std::complex<double> cascaded_gain(double frequency_hz, double path_length_m,
                                   double absorption_per_m);

/// AP -> IRS -> UE channel for a given phase configuration.
/// Throws std::domain_error if the AP or the UE sits on the reference element.
std::complex<double> reflected_channel(const SubBand& band, const Medium& medium,
                                       const IrsPlacement& placement, const PhaseVector& phases,
                                       const Scene& scene, std::size_t ue);

/// B * log2(1 + p |h|^2 / (S_N B)), in bits/s.
double subband_rate(const SubBand& band, double power_w, double channel_power_gain);

}  // namespace thz
