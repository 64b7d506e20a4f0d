#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace radarpose {

using Vec3 = Eigen::Vector3d;

/// One detected point. Coordinates are in the frame of whoever produced it
/// (radar frame straight out of detection, world frame after fusion).
/// `snr` holds dB until normalize_snr rescales it.
struct RadarPoint {
  Vec3 xyz = Vec3::Zero();
  double velocity = 0.0;
  double snr = 0.0;

  bool operator==(const RadarPoint&) const = default;
};

/// Points captured by one radar at one instant.
struct PointFrame {
  std::int64_t t_ms = 0;
  std::vector<RadarPoint> points;
};

}  // namespace radarpose
