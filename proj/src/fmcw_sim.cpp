#include "radarpose/fmcw_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fftw3.h>

namespace radarpose {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> window_coefficients(std::size_t n, SpectrumWindow window) {
  std::vector<double> w(n, 1.0);
  if (window == SpectrumWindow::kHann) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

RawFrame::RawFrame(const ChirpConfig& cfg, std::int64_t timestamp_ms)
    : config_(cfg), timestamp_ms_(timestamp_ms), samples_(cfg.n_chirps * kRxCount * cfg.n_samples) {}

std::span<const std::complex<double>> RawFrame::chirp_samples(std::size_t chirp, std::size_t rx) const {
  if (chirp >= config_.n_chirps || rx >= kRxCount) throw std::out_of_range("RawFrame: chirp/rx index out of range");
  return {samples_.data() + index(chirp, rx, 0), config_.n_samples};
}

RawFrame synthesize_frame(std::span<const Reflector> reflectors, const ChirpConfig& cfg, std::uint64_t seed,
                          std::int64_t timestamp_ms) {
  cfg.validate();
  RawFrame frame(cfg, timestamp_ms);
  const double lambda = cfg.wavelength();
  const double spacing = cfg.effective_rx_spacing();
  const double fs = cfg.effective_sample_rate();
  std::vector<std::complex<double>> tone(cfg.n_samples);

  for (const Reflector& r : reflectors) {
    const double range = r.position.norm();
    if (!(range > 0.0)) throw std::domain_error("synthesize_frame: reflector at zero range");
    if (r.rcs_amplitude < 0.0) throw std::domain_error("synthesize_frame: negative rcs amplitude");
    const double f0 = beat_frequency(range, cfg.slope);
    const double phi0 = phase_at_range(range, lambda);
    const double dphi_doppler = doppler_phase(r.radial_velocity, cfg.t_chirp, lambda);
    const double theta = std::asin(std::clamp(r.position.x() / range, -1.0, 1.0));
    const double dphi_angle = azimuth_phase(theta, spacing, lambda);
    const double dphase_sample = kTwoPi * f0 / fs;

    // Chirp and RX offsets only rotate the whole tone.
    for (std::size_t n = 0; n < cfg.n_samples; ++n)
      tone[n] = std::polar(r.rcs_amplitude, phi0 + dphase_sample * static_cast<double>(n));
    for (std::size_t c = 0; c < cfg.n_chirps; ++c) {
      for (std::size_t rx = 0; rx < RawFrame::kRxCount; ++rx) {
        const auto rot = std::polar(1.0, static_cast<double>(c) * dphi_doppler + static_cast<double>(rx) * dphi_angle);
        for (std::size_t n = 0; n < cfg.n_samples; ++n) frame.at(c, rx, n) += tone[n] * rot;
      }
    }
  }

  if (cfg.noise_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, cfg.noise_std / std::numbers::sqrt2);
    for (std::size_t c = 0; c < cfg.n_chirps; ++c)
      for (std::size_t rx = 0; rx < RawFrame::kRxCount; ++rx)
        for (std::size_t n = 0; n < cfg.n_samples; ++n) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          frame.at(c, rx, n) += std::complex<double>(re, im);
        }
  }
  return frame;
}

std::vector<std::complex<double>> range_spectrum(const RawFrame& frame, std::size_t chirp, std::size_t rx,
                                                 SpectrumWindow window) {
  const auto samples = frame.chirp_samples(chirp, rx);
  const std::size_t n = samples.size();
  const auto w = window_coefficients(n, window);

  std::vector<std::complex<double>> in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = samples[i] * w[i];

  auto* in_ptr = reinterpret_cast<fftw_complex*>(in.data());
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in_ptr, out_ptr, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

std::vector<Detection> detect_points(const RawFrame& frame, const DetectorConfig& det) {
  const ChirpConfig& cfg = frame.config();
  const auto x00 = range_spectrum(frame, 0, 0, det.window);
  const auto x01 = range_spectrum(frame, 0, 1, det.window);
  const auto x10 = range_spectrum(frame, 1, 0, det.window);

  const std::size_t n = x00.size();
  std::vector<double> power(n);
  for (std::size_t k = 0; k < n; ++k) power[k] = std::norm(x00[k]);
  const double peak = *std::max_element(power.begin(), power.end());
  // A noiseless frame can have an exactly-zero median; cap dynamic range at 200 dB.
  const double floor = std::max(median(power), peak * 1e-20);
  const double threshold = floor * std::pow(10.0, det.threshold_db / 10.0);

  const double lambda = cfg.wavelength();
  const double spacing = cfg.effective_rx_spacing();
  std::vector<Detection> out;
  // Bin 0 is zero range; not a physical target.
  for (std::size_t k = 1; k < n; ++k) {
    const double p = power[k];
    if (!(p > threshold)) continue;
    if (p <= power[k - 1]) continue;
    if (k + 1 < n && p <= power[k + 1]) continue;

    double bin = static_cast<double>(k);
    if (det.interpolate_peak && k + 1 < n) {
      const double a = std::abs(x00[k - 1]);
      const double b = std::abs(x00[k]);
      const double c = std::abs(x00[k + 1]);
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) bin += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }

    const double dphi_v = std::arg(x10[k] * std::conj(x00[k]));
    const double dphi_a = std::arg(x01[k] * std::conj(x00[k]));

    Detection d;
    d.range = range_from_beat(bin * cfg.effective_sample_rate() / static_cast<double>(n), cfg.slope);
    d.radial_velocity = velocity_from_phase(dphi_v, cfg.t_chirp, lambda).value;
    try {
      d.azimuth = angle_from_phase(dphi_a, spacing, lambda);
    } catch (const std::domain_error&) {
      continue;
    }
    d.elevation = 0.0;
    d.snr_db = 10.0 * std::log10(p / floor);
    if (!std::isfinite(d.snr_db)) continue;
    out.push_back(d);
  }
  return out;
}

PointFrame detections_to_points(std::span<const Detection> dets, std::int64_t timestamp_ms) {
  PointFrame frame;
  frame.t_ms = timestamp_ms;
  frame.points.reserve(dets.size());
  for (const Detection& d : dets) {
    RadarPoint p;
    const double ce = std::cos(d.elevation);
    p.xyz = Vec3(d.range * std::sin(d.azimuth) * ce, d.range * std::cos(d.azimuth) * ce,
                 d.range * std::sin(d.elevation));
    p.velocity = d.radial_velocity;
    p.snr = d.snr_db;
    frame.points.push_back(p);
  }
  return frame;
}

}  // namespace radarpose
