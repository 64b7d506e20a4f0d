#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "radarpose/point.hpp"
#include "radarpose/skeleton.hpp"

namespace radarpose {

/// Mounting of one radar: on the y = 0 line, `height` above the floor,
/// boresight along +y pitched down by `tilt_down`.
struct RadarPose {
  double height = 0.0;
  double tilt_down = 0.0;  // rad
  double lateral_offset = 0.0;

  void validate() const;
  Vec3 origin() const { return {lateral_offset, 0.0, height}; }

  /// Low radar: 1 m high, 15 degrees down.
  static RadarPose radar_a();
  /// High radar: 2 m high, 20 degrees down.
  static RadarPose radar_b();
};

Vec3 radar_to_world(const Vec3& p, const RadarPose& pose);
Vec3 world_to_radar(const Vec3& p, const RadarPose& pose);
RadarPoint radar_to_world(const RadarPoint& p, const RadarPose& pose);

struct AlignedPair {
  std::size_t a = 0;
  std::size_t b = 0;
  std::int64_t dt_ms = 0;  // t_b - t_a
};

/// Greedy nearest-timestamp pairing. Candidate pairs with |dt| above
/// window_ms / 2 are dropped; each frame is used at most once. Output is
/// sorted by `a`. Throws std::invalid_argument if a stream is unsorted.
std::vector<AlignedPair> align_streams(std::span<const std::int64_t> stream_a,
                                       std::span<const std::int64_t> stream_b, std::int64_t window_ms);

inline constexpr int kNoise = -1;

/// Density-based clustering on Euclidean xyz distance.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Clusters are the connected components of core points.
/// A non-core point within `eps` of some core joins the cluster of its
/// nearest such core (lowest index on exact ties), which makes the
/// partition independent of input order. Labels are numbered 0, 1, ... in
/// order of each cluster's lowest-index member; noise is kNoise.
std::vector<int> dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts);
std::vector<int> dbscan(std::span<const RadarPoint> points, double eps, std::size_t min_pts);

/// Drops DBSCAN noise, preserving order.
std::vector<RadarPoint> denoise(std::span<const RadarPoint> points, double eps, std::size_t min_pts);

/// Denoised, world-frame union of the radars' points at one instant.
struct FusedFrame {
  std::int64_t frame_id = 0;
  std::int64_t t_ms = 0;
  std::vector<RadarPoint> points;
  SkeletonFrame gt;
};

/// Min-max SNR affine fitted on a training split.
struct SnrScaler {
  double snr_min = 0.0;
  double snr_max = 1.0;

  /// Degenerate range (max == min) maps every value to 0.5.
  double apply(double snr) const;
  void apply(std::vector<FusedFrame>& frames) const;
};

/// Fits on `train` (throws std::invalid_argument if it has no points),
/// rescales it in place and returns the constants for reuse on test data.
SnrScaler normalize_snr(std::vector<FusedFrame>& train);

using ViewMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The two N_max x 4 model inputs: rows (x, y, v, snr) and (y, z, v, snr).
struct ViewPair {
  ViewMatrix view_xy;
  ViewMatrix view_yz;
  std::size_t pad_count = 0;

  bool operator==(const ViewPair& o) const {
    return pad_count == o.pad_count && view_xy == o.view_xy && view_yz == o.view_yz;
  }
};

/// Sorts points canonically (range from the world origin, then azimuth
/// atan2(x, y), then z, then velocity and snr), keeps the first n_max and
/// zero-pads the rest.
ViewPair build_views(std::span<const RadarPoint> points, std::size_t n_max);

struct FusionConfig {
  double eps = 0.3;
  std::size_t min_pts = 3;
  std::int64_t window_ms = 50;
  std::size_t n_max = 64;
};

/// Transforms each radar's points to world and concatenates them, then
/// denoises the union.
std::vector<RadarPoint> fuse_points(std::span<const std::vector<RadarPoint>> per_radar,
                                    std::span<const RadarPose> poses, const FusionConfig& cfg);

}  // namespace radarpose
