#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "radarpose/radar_physics.hpp"

using namespace radarpose;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kC = 299792458.0;

}  // namespace

TEST(RadarPhysics, RoundTripDelay) {
  EXPECT_NEAR(round_trip_delay(1.5), 1.000692e-8, 1e-13);
  EXPECT_DOUBLE_EQ(round_trip_delay(0.0), 0.0);
  EXPECT_THROW(round_trip_delay(-1.0), std::domain_error);
}

TEST(RadarPhysics, BeatFrequencyExample) {
  const double f = beat_frequency(2.0, 3e13);
  EXPECT_NEAR(f, 400.277e3, 1.0);
  EXPECT_NEAR(range_from_beat(f, 3e13), 2.0, 1e-12);
  EXPECT_THROW(beat_frequency(1.0, 0.0), std::domain_error);
}

TEST(RadarPhysics, PhaseAtRange) {
  // 4 pi / 3.893e-3 = 3227.940...
  EXPECT_NEAR(phase_at_range(1.0, 3.893e-3), 3227.9400, 1e-4);
  EXPECT_NEAR(phase_at_range(2.0, 3.893e-3), 2.0 * phase_at_range(1.0, 3.893e-3), 1e-9);
}

TEST(RadarPhysics, DopplerPhaseExample) {
  const double dphi = doppler_phase(1.0, 1e-4, 3.893e-3);
  EXPECT_NEAR(dphi, 0.322794, 1e-6);
  EXPECT_NEAR(doppler_phase(-1.0, 1e-4, 3.893e-3), -dphi, 0.0);
  const auto v = velocity_from_phase(dphi, 1e-4, 3.893e-3);
  EXPECT_NEAR(v.value, 1.0, 1e-12);
  EXPECT_NEAR(velocity_from_phase(0.32277, 1e-4, 3.893e-3).value, 1.000, 1e-3);
  EXPECT_FALSE(v.ambiguous);
  EXPECT_TRUE(velocity_from_phase(4.0, 1e-4, 3.893e-3).ambiguous);
}

TEST(RadarPhysics, AzimuthHalfWavelengthExample) {
  const double lambda = 3.893e-3;
  const double theta = 30.0 * kPi / 180.0;
  EXPECT_NEAR(azimuth_phase(theta, lambda / 2, lambda), kPi / 2, 1e-12);
  EXPECT_NEAR(angle_from_phase(kPi / 2, lambda / 2, lambda), theta, 1e-12);
  EXPECT_THROW(angle_from_phase(4.0, lambda / 2, lambda), std::domain_error);
}

TEST(RadarPhysics, FormulasMatchDirectEvaluation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.1, 20.0), s(1e12, 1e14), v(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double dist = d(rng), slope = s(rng), vel = v(rng), lambda = 3.9e-3, tc = 5e-5;
    EXPECT_NEAR(beat_frequency(dist, slope) / (slope * 2 * dist / kC), 1.0, 1e-14);
    EXPECT_NEAR(phase_at_range(dist, lambda) / (4 * kPi * dist / lambda), 1.0, 1e-14);
    EXPECT_NEAR(doppler_phase(vel, tc, lambda), 4 * kPi * vel * tc / lambda, 1e-12);
  }
}

TEST(ChirpConfig, DerivedQuantities) {
  ChirpConfig cfg;
  cfg.validate();
  EXPECT_NEAR(cfg.wavelength(), kC / 77e9, 1e-15);
  EXPECT_NEAR(cfg.bandwidth(), 4e9, 1.0);
  EXPECT_NEAR(cfg.range_resolution(), kC / 8e9, 1e-12);
  EXPECT_NEAR(cfg.effective_rx_spacing(), cfg.wavelength() / 2, 1e-15);
  EXPECT_NEAR(cfg.velocity_per_radian(), cfg.wavelength() / (4 * kPi * cfg.t_chirp), 1e-12);
  // One FFT bin spans fs / N in beat frequency.
  EXPECT_NEAR(cfg.bin_range(), range_from_beat(cfg.effective_sample_rate() / cfg.n_samples, cfg.slope), 1e-12);
}

TEST(ChirpConfig, RejectsBadValues) {
  ChirpConfig cfg;
  cfg.n_samples = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.slope = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.noise_std = -0.1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
