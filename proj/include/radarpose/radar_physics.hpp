#pragma once

#include <cstddef>

namespace radarpose {

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// FMCW waveform and receiver parameters for one radar.
///
/// Defaults describe a 77 GHz sensor sweeping 4 GHz in 50 us, sampled so
/// that the full chirp duration is captured (range bin = c / 2B = 3.75 cm).
struct ChirpConfig {
  double f_start = 77.0e9;         // Hz
  double slope = 80.0e12;          // Hz/s
  double t_chirp = 50.0e-6;        // s
  std::size_t n_samples = 256;     // per chirp
  std::size_t n_chirps = 2;        // per frame
  double rx_spacing = 0.0;         // m; 0 selects lambda / 2
  double noise_std = 1.0;          // complex noise std, linear amplitude
  double sample_rate = 0.0;        // Hz; 0 selects n_samples / t_chirp

  double wavelength() const { return kSpeedOfLight / f_start; }
  double bandwidth() const { return slope * t_chirp; }
  double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth()); }
  double effective_rx_spacing() const { return rx_spacing > 0.0 ? rx_spacing : wavelength() / 2.0; }
  double effective_sample_rate() const {
    return sample_rate > 0.0 ? sample_rate : static_cast<double>(n_samples) / t_chirp;
  }
  /// Range covered by one FFT bin of the range spectrum.
  double bin_range() const;
  /// Radial velocity producing one radian of chirp-to-chirp phase.
  double velocity_per_radian() const;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// tau = 2d / c.
double round_trip_delay(double distance);

/// IF beat frequency f0 = S * 2d / c.
double beat_frequency(double distance, double slope);

/// Inverse of beat_frequency: d = f0 * c / (2S).
double range_from_beat(double beat, double slope);

/// Unwrapped IF phase 4 pi d / lambda.
double phase_at_range(double distance, double wavelength);

/// Chirp-to-chirp phase shift 4 pi v Tc / lambda.
double doppler_phase(double velocity, double t_chirp, double wavelength);

struct VelocityEstimate {
  double value = 0.0;
  /// Set when |dphi| > pi, i.e. the phase may have wrapped.
  bool ambiguous = false;
};

/// v = lambda * dphi / (4 pi Tc).
VelocityEstimate velocity_from_phase(double phase_delta, double t_chirp, double wavelength);

/// Phase difference between two receive antennas spaced l apart: 2 pi l sin(theta) / lambda.
double azimuth_phase(double angle, double rx_spacing, double wavelength);

/// theta = asin(lambda * dphi / (2 pi l)). Throws std::domain_error when the
/// asin argument leaves [-1, 1].
double angle_from_phase(double phase_delta, double rx_spacing, double wavelength);

}  // namespace radarpose
