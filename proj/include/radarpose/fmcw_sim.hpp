#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "radarpose/point.hpp"
#include "radarpose/radar_physics.hpp"

namespace radarpose {

/// A point scatterer in the radar frame (x lateral, y boresight, z up).
struct Reflector {
  Vec3 position = Vec3::Zero();
  double radial_velocity = 0.0;  // m/s, positive when receding
  double rcs_amplitude = 1.0;
};

/// Complex IF samples for one frame, laid out [chirp][rx][sample].
class RawFrame {
 public:
  static constexpr std::size_t kRxCount = 2;

  RawFrame() = default;
  RawFrame(const ChirpConfig& cfg, std::int64_t timestamp_ms);

  const ChirpConfig& config() const { return config_; }
  std::int64_t timestamp_ms() const { return timestamp_ms_; }

  std::complex<double>& at(std::size_t chirp, std::size_t rx, std::size_t n) {
    return samples_[index(chirp, rx, n)];
  }
  const std::complex<double>& at(std::size_t chirp, std::size_t rx, std::size_t n) const {
    return samples_[index(chirp, rx, n)];
  }
  std::span<const std::complex<double>> chirp_samples(std::size_t chirp, std::size_t rx) const;
  const std::vector<std::complex<double>>& samples() const { return samples_; }

 private:
  std::size_t index(std::size_t chirp, std::size_t rx, std::size_t n) const {
    return (chirp * kRxCount + rx) * config_.n_samples + n;
  }

  ChirpConfig config_;
  std::int64_t timestamp_ms_ = 0;
  std::vector<std::complex<double>> samples_;
};

struct Detection {
  double range = 0.0;            // m
  double radial_velocity = 0.0;  // m/s
  double azimuth = 0.0;          // rad
  double elevation = 0.0;        // rad, always 0 for a single azimuth RX pair
  double snr_db = 0.0;
};

enum class SpectrumWindow { kRectangular, kHann };

struct DetectorConfig {
  double threshold_db = 12.0;
  SpectrumWindow window = SpectrumWindow::kRectangular;
  /// Refine the peak position with a three-point parabola on |X|.
  bool interpolate_peak = true;
};

/// Sum of reflector tones plus circular Gaussian noise. Deterministic in
/// (reflectors, cfg, seed). Throws std::domain_error for a reflector at
/// zero range.
RawFrame synthesize_frame(std::span<const Reflector> reflectors, const ChirpConfig& cfg,
                          std::uint64_t seed, std::int64_t timestamp_ms = 0);

/// DFT of one chirp. Bin k corresponds to range k * cfg.bin_range().
std::vector<std::complex<double>> range_spectrum(const RawFrame& frame, std::size_t chirp, std::size_t rx,
                                                 SpectrumWindow window = SpectrumWindow::kRectangular);

/// Constant-threshold peak picker over the chirp-0/RX-0 range spectrum.
/// Noise floor is the median spectrum power; a bin is reported when it is a
/// strict local maximum at least `threshold_db` above that floor.
std::vector<Detection> detect_points(const RawFrame& frame, const DetectorConfig& det = {});

/// Spherical to Cartesian (radar frame).
PointFrame detections_to_points(std::span<const Detection> dets, std::int64_t timestamp_ms);

}  // namespace radarpose
