// SPDX-License-Identifier: Apache-2.0

#include "thzirs/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <stdexcept>

namespace thz {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string("non-finite ") + what);
}

}  // namespace

void Atmosphere::validate() const {
  require_finite(temperature_c, "temperature");
  require_finite(pressure_hpa, "pressure");
  require_finite(relative_humidity_pct, "relative humidity");
  if (!(pressure_hpa > 0.0)) throw std::invalid_argument("pressure must be positive");
  if (relative_humidity_pct < 0.0 || relative_humidity_pct > 100.0)
    throw std::invalid_argument("relative humidity must lie in [0, 100] %");
  if (!(temperature_c > -100.0)) throw std::invalid_argument("temperature must exceed -100 C");
}

void SubBand::validate() const {
  if (!(center_hz > 0.0) || !std::isfinite(center_hz)) throw std::invalid_argument("sub-band center must be positive");
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
    throw std::invalid_argument("sub-band bandwidth must be positive");
  if (!(noise_psd_w_per_hz > 0.0)) throw std::invalid_argument("noise PSD must be positive");
  const double delta = inverse_noise_power();
  if (!std::isfinite(delta) || !(delta > 0.0)) throw std::invalid_argument("1/(S_N B) is not finite");
}

double dbm_per_hz_to_w_per_hz(double dbm_per_hz) { return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0); }

SubBand SubBand::with_thermal_noise(double center_hz, double bandwidth_hz, double noise_figure_db,
                                    double thermal_dbm_per_hz) {
  SubBand b{center_hz, bandwidth_hz, dbm_per_hz_to_w_per_hz(thermal_dbm_per_hz + noise_figure_db)};
  b.validate();
  return b;
}

double saturated_vapor_pressure(double temperature_c, double pressure_hpa) {
  require_finite(temperature_c, "temperature");
  require_finite(pressure_hpa, "pressure");
  return 6.1121 * (1.0007 + 3.46e-8 * pressure_hpa) * std::exp(17.502 * temperature_c / (240.97 + temperature_c));
}

double water_vapor_mixing_ratio(const Atmosphere& atmosphere) {
  if (atmosphere.pressure_hpa == 0.0) throw std::domain_error("zero pressure");
  atmosphere.validate();
  return atmosphere.relative_humidity_pct / 100.0 *
         saturated_vapor_pressure(atmosphere.temperature_c, atmosphere.pressure_hpa) / atmosphere.pressure_hpa;
}

Absorption absorption_coefficient(double frequency_hz, double mixing_ratio, DetuningModel model) {
  require_finite(frequency_hz, "frequency");
  require_finite(mixing_ratio, "mixing ratio");
  if (mixing_ratio < 0.0) throw std::domain_error("negative mixing ratio");
  const double mu = mixing_ratio;
  const double a = 0.2205 * mu * (0.1303 * mu + 0.0294);
  const double b = (0.4093 * mu + 0.0925) * (0.4093 * mu + 0.0925);
  const double c = 2.014 * mu * (0.1702 * mu + 0.0303);
  const double d = (0.537 * mu + 0.0956) * (0.537 * mu + 0.0956);

  // f / (100 c): frequency as a wavenumber in cm^-1.
  const double nu = frequency_hz / (100.0 * kSpeedOfLight);
  double detune1 = nu - 10.835;
  double detune2 = nu - 12.664;
  if (model == DetuningModel::Squared) {
    detune1 *= detune1;
    detune2 *= detune2;
  }

  const double f = frequency_hz;
  const double polynomial = ((5.54e-37 * f - 3.94e-25) * f + 9.06e-14) * f - 6.36e-3;
  Absorption k;
  k.per_m = a / (b + detune1) + c / (d + detune2) + polynomial;
  k.in_validity_window = f >= kAbsorptionModelMinHz && f <= kAbsorptionModelMaxHz;
  return k;
}

Medium Medium::from_atmosphere(const Atmosphere& atmosphere, DetuningModel detuning) {
  return {water_vapor_mixing_ratio(atmosphere), detuning};
}

std::complex<double> cascaded_gain(double frequency_hz, double path_length_m, double absorption_per_m) {
  require_finite(path_length_m, "path length");
  require_finite(absorption_per_m, "absorption");
  if (!(frequency_hz > 0.0)) throw std::domain_error("frequency must be positive");
  if (!(path_length_m > 0.0)) throw std::domain_error("path length must be positive");
  const double spreading = kSpeedOfLight / (4.0 * kPi * frequency_hz * path_length_m);
  const double attenuation = std::exp(-0.5 * absorption_per_m * path_length_m);
  const double delay_phase = -2.0 * kPi * std::fmod(frequency_hz * path_length_m / kSpeedOfLight, 1.0);
  return std::polar(spreading * attenuation, delay_phase);
}

std::complex<double> reflected_channel(const SubBand& band, const Medium& medium, const IrsPlacement& placement,
                                       const PhaseVector& phases, const Scene& scene, std::size_t ue) {
  if (phases.size() != placement.element_count)
    throw std::invalid_argument("phase vector length differs from element count");
  const double f = band.center_hz;
  const std::complex<double> g = cascaded_gain(f, path_length(placement, scene, ue), medium.absorption(f));
  std::complex<double> array_sum = 0.0;
  for (std::size_t n = 0; n < placement.element_count; ++n) {
    const double lag = incident_steering_phase(f, placement, scene, n) +
                       departure_steering_phase(f, placement, scene, ue, n);
    array_sum += std::polar(1.0, phases.angle(n) - lag);
  }
  return g * array_sum;
}

double subband_rate(const SubBand& band, double power_w, double channel_power_gain) {
  require_finite(power_w, "power");
  require_finite(channel_power_gain, "channel gain");
  if (power_w < 0.0 || channel_power_gain < 0.0) throw std::domain_error("negative power or gain");
  return band.bandwidth_hz * std::log2(1.0 + power_w * channel_power_gain * band.inverse_noise_power());
}

}  // namespace thz
