#include "radarpose/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace radarpose {

void RadarPose::validate() const {
  if (!(height >= 0.0)) throw std::invalid_argument("RadarPose: height must be non-negative");
  if (!(std::abs(tilt_down) < std::numbers::pi / 2.0)) throw std::invalid_argument("RadarPose: |tilt| must be < 90 deg");
}

RadarPose RadarPose::radar_a() { return {1.0, 15.0 * std::numbers::pi / 180.0, 0.0}; }
RadarPose RadarPose::radar_b() { return {2.0, 20.0 * std::numbers::pi / 180.0, 0.0}; }

Vec3 radar_to_world(const Vec3& p, const RadarPose& pose) {
  // Rotation about x by -tilt_down.
  const double c = std::cos(pose.tilt_down);
  const double s = std::sin(pose.tilt_down);
  return {p.x() + pose.lateral_offset, c * p.y() + s * p.z(), -s * p.y() + c * p.z() + pose.height};
}

Vec3 world_to_radar(const Vec3& p, const RadarPose& pose) {
  const double c = std::cos(pose.tilt_down);
  const double s = std::sin(pose.tilt_down);
  const double y = p.y();
  const double z = p.z() - pose.height;
  return {p.x() - pose.lateral_offset, c * y - s * z, s * y + c * z};
}

RadarPoint radar_to_world(const RadarPoint& p, const RadarPose& pose) {
  RadarPoint out = p;
  out.xyz = radar_to_world(p.xyz, pose);
  return out;
}

std::vector<AlignedPair> align_streams(std::span<const std::int64_t> stream_a,
                                       std::span<const std::int64_t> stream_b, std::int64_t window_ms) {
  if (!std::is_sorted(stream_a.begin(), stream_a.end()) || !std::is_sorted(stream_b.begin(), stream_b.end()))
    throw std::invalid_argument("align_streams: streams must be sorted by timestamp");
  if (window_ms < 0) throw std::invalid_argument("align_streams: negative window");

  struct Candidate {
    std::int64_t abs_dt;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Candidate> candidates;
  // Both streams are sorted, so for each a only a contiguous run of b can be
  // within the half window.
  std::size_t lo = 0;
  for (std::size_t i = 0; i < stream_a.size(); ++i) {
    const std::int64_t ta = stream_a[i];
    while (lo < stream_b.size() && 2 * (ta - stream_b[lo]) > window_ms) ++lo;
    for (std::size_t j = lo; j < stream_b.size() && 2 * (stream_b[j] - ta) <= window_ms; ++j)
      candidates.push_back({std::abs(stream_b[j] - ta), i, j});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& l, const Candidate& r) { return std::tie(l.abs_dt, l.a, l.b) < std::tie(r.abs_dt, r.a, r.b); });

  std::vector<bool> used_a(stream_a.size(), false), used_b(stream_b.size(), false);
  std::vector<AlignedPair> out;
  for (const Candidate& c : candidates) {
    if (used_a[c.a] || used_b[c.b]) continue;
    used_a[c.a] = used_b[c.b] = true;
    out.push_back({c.a, c.b, stream_b[c.b] - stream_a[c.a]});
  }
  std::sort(out.begin(), out.end(), [](const AlignedPair& l, const AlignedPair& r) { return l.a < r.a; });
  return out;
}

std::vector<int> dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be positive");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
  const std::size_t n = points.size();
  const double eps2 = eps * eps;

  // Sweep over x to build neighbor lists.
  std::vector<std::size_t> by_x(n);
  std::iota(by_x.begin(), by_x.end(), std::size_t{0});
  std::sort(by_x.begin(), by_x.end(), [&](std::size_t l, std::size_t r) {
    return std::tie(points[l].x(), l) < std::tie(points[r].x(), r);
  });
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = by_x[s];
    neighbors[i].push_back(i);
    for (std::size_t t = s + 1; t < n; ++t) {
      const std::size_t j = by_x[t];
      if (points[j].x() - points[i].x() > eps) break;
      if ((points[j] - points[i]).squaredNorm() <= eps2) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  for (auto& nb : neighbors) std::sort(nb.begin(), nb.end());

  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbors[i].size() >= min_pts;

  // Components over core points, expanded in ascending index order.
  std::vector<int> component(n, kNoise);
  int n_components = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || component[seed] != kNoise) continue;
    const int id = n_components++;
    std::deque<std::size_t> queue{seed};
    component[seed] = id;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (std::size_t q : neighbors[p]) {
        if (core[q] && component[q] == kNoise) {
          component[q] = id;
          queue.push_back(q);
        }
      }
    }
  }

  // Border points go to their nearest core.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q : neighbors[i]) {
      if (!core[q]) continue;
      const double d2 = (points[q] - points[i]).squaredNorm();
      if (d2 < best) {
        best = d2;
        component[i] = component[q];
      }
    }
  }

  // Renumber by first appearance.
  std::vector<int> remap(static_cast<std::size_t>(n_components), kNoise);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (component[i] == kNoise) continue;
    int& r = remap[static_cast<std::size_t>(component[i])];
    if (r == kNoise) r = next++;
    component[i] = r;
  }
  return component;
}

std::vector<int> dbscan(std::span<const RadarPoint> points, double eps, std::size_t min_pts) {
  std::vector<Vec3> xyz;
  xyz.reserve(points.size());
  for (const auto& p : points) xyz.push_back(p.xyz);
  return dbscan(std::span<const Vec3>(xyz), eps, min_pts);
}

std::vector<RadarPoint> denoise(std::span<const RadarPoint> points, double eps, std::size_t min_pts) {
  const auto labels = dbscan(points, eps, min_pts);
  std::vector<RadarPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (labels[i] != kNoise) out.push_back(points[i]);
  return out;
}

double SnrScaler::apply(double snr) const {
  if (snr_max == snr_min) return 0.5;
  return (snr - snr_min) / (snr_max - snr_min);
}

void SnrScaler::apply(std::vector<FusedFrame>& frames) const {
  for (auto& f : frames)
    for (auto& p : f.points) p.snr = apply(p.snr);
}

SnrScaler normalize_snr(std::vector<FusedFrame>& train) {
  SnrScaler s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& f : train)
    for (const auto& p : f.points) {
      s.snr_min = std::min(s.snr_min, p.snr);
      s.snr_max = std::max(s.snr_max, p.snr);
    }
  if (!(s.snr_min <= s.snr_max)) throw std::invalid_argument("normalize_snr: training split has no points");
  s.apply(train);
  return s;
}

ViewPair build_views(std::span<const RadarPoint> points, std::size_t n_max) {
  auto key = [](const RadarPoint& p) {
    return std::make_tuple(p.xyz.norm(), std::atan2(p.xyz.x(), p.xyz.y()), p.xyz.z(), p.velocity, p.snr);
  };
  std::vector<RadarPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [&](const RadarPoint& l, const RadarPoint& r) { return key(l) < key(r); });
  if (sorted.size() > n_max) sorted.resize(n_max);

  ViewPair v;
  v.view_xy = ViewMatrix::Zero(static_cast<Eigen::Index>(n_max), 4);
  v.view_yz = ViewMatrix::Zero(static_cast<Eigen::Index>(n_max), 4);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& p = sorted[i];
    const auto r = static_cast<Eigen::Index>(i);
    v.view_xy.row(r) << p.xyz.x(), p.xyz.y(), p.velocity, p.snr;
    v.view_yz.row(r) << p.xyz.y(), p.xyz.z(), p.velocity, p.snr;
  }
  v.pad_count = n_max - sorted.size();
  return v;
}

std::vector<RadarPoint> fuse_points(std::span<const std::vector<RadarPoint>> per_radar,
                                    std::span<const RadarPose> poses, const FusionConfig& cfg) {
  if (per_radar.size() != poses.size()) throw std::invalid_argument("fuse_points: one pose per radar required");
  std::vector<RadarPoint> merged;
  for (std::size_t r = 0; r < per_radar.size(); ++r)
    for (const auto& p : per_radar[r]) merged.push_back(radar_to_world(p, poses[r]));
  return denoise(merged, cfg.eps, cfg.min_pts);
}

}  // namespace radarpose
