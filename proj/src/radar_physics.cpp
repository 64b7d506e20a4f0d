#include "radarpose/radar_physics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace radarpose {
namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace

double ChirpConfig::bin_range() const {
  return kSpeedOfLight * effective_sample_rate() / (2.0 * slope * static_cast<double>(n_samples));
}

double ChirpConfig::velocity_per_radian() const {
  return wavelength() / (4.0 * kPi * t_chirp);
}

void ChirpConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ChirpConfig: " + msg); };
  if (!(f_start > 0.0)) fail("f_start must be positive");
  if (!(slope > 0.0)) fail("slope must be positive");
  if (!(t_chirp > 0.0)) fail("t_chirp must be positive");
  if (n_samples < 8) fail("n_samples must be >= 8");
  if (n_chirps < 2) fail("n_chirps must be >= 2");
  if (rx_spacing < 0.0) fail("rx_spacing must be non-negative");
  if (effective_rx_spacing() > wavelength() / 2.0 * (1.0 + 1e-12))
    fail("rx_spacing above lambda/2 makes azimuth ambiguous");
  if (!(noise_std >= 0.0)) fail("noise_std must be non-negative");
  if (sample_rate < 0.0) fail("sample_rate must be non-negative");
}

double round_trip_delay(double distance) {
  require(distance >= 0.0, "round_trip_delay: negative distance");
  return 2.0 * distance / kSpeedOfLight;
}

double beat_frequency(double distance, double slope) {
  require(distance >= 0.0, "beat_frequency: negative distance");
  require(slope > 0.0, "beat_frequency: slope must be positive");
  return slope * 2.0 * distance / kSpeedOfLight;
}

double range_from_beat(double beat, double slope) {
  require(slope > 0.0, "range_from_beat: slope must be positive");
  require(beat >= 0.0, "range_from_beat: negative beat frequency");
  return beat * kSpeedOfLight / (2.0 * slope);
}

double phase_at_range(double distance, double wavelength) {
  require(wavelength > 0.0, "phase_at_range: wavelength must be positive");
  require(distance >= 0.0, "phase_at_range: negative distance");
  return 4.0 * kPi * distance / wavelength;
}

double doppler_phase(double velocity, double t_chirp, double wavelength) {
  require(wavelength > 0.0 && t_chirp > 0.0, "doppler_phase: wavelength and t_chirp must be positive");
  return 4.0 * kPi * velocity * t_chirp / wavelength;
}

VelocityEstimate velocity_from_phase(double phase_delta, double t_chirp, double wavelength) {
  require(wavelength > 0.0 && t_chirp > 0.0, "velocity_from_phase: wavelength and t_chirp must be positive");
  return {wavelength * phase_delta / (4.0 * kPi * t_chirp), std::abs(phase_delta) > kPi};
}

double azimuth_phase(double angle, double rx_spacing, double wavelength) {
  require(rx_spacing > 0.0 && wavelength > 0.0, "azimuth_phase: spacing and wavelength must be positive");
  require(std::abs(angle) <= kPi / 2.0, "azimuth_phase: angle outside (-pi/2, pi/2)");
  return 2.0 * kPi * rx_spacing * std::sin(angle) / wavelength;
}

double angle_from_phase(double phase_delta, double rx_spacing, double wavelength) {
  require(rx_spacing > 0.0 && wavelength > 0.0, "angle_from_phase: spacing and wavelength must be positive");
  const double s = wavelength * phase_delta / (2.0 * kPi * rx_spacing);
  if (std::abs(s) > 1.0) throw std::domain_error("angle_from_phase: target outside the field of view");
  return std::asin(s);
}

}  // namespace radarpose
