#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "radarpose/fmcw_sim.hpp"
#include "radarpose/pointcloud.hpp"
#include "radarpose/skeleton.hpp"

namespace radarpose {

/// Segment lengths of the synthetic body, metres. Left and right share
/// one value so the template is mirror-symmetric.
struct BoneLengths {
  double hip_half_width = 0.09;
  double thigh = 0.42;
  double shin = 0.41;
  double ankle_height = 0.08;
  double foot = 0.15;
  double spine_lower = 0.12;
  double spine_upper = 0.20;
  double neck = 0.20;
  double head = 0.12;
  double clavicle = 0.06;
  double shoulder = 0.14;
  double upper_arm = 0.28;
  double forearm = 0.26;
  double hand = 0.08;
  double handtip = 0.07;
  double thumb = 0.05;
  double nose = 0.10;
  double eye = 0.09;
  double ear = 0.08;

  void validate() const;
  /// Profile for subject `id`: id 0 uses the defaults, others are scaled copies.
  static BoneLengths for_subject(int id);
};

/// Floor-to-head-joint height of the upright template.
double standing_height(const BoneLengths& b);

inline constexpr double kMinDepth = 1.9;
inline constexpr double kMaxDepth = 3.5;
inline constexpr double kRestDepth = 2.7;

struct MotionConfig {
  double fps = 10.0;
  double duration = 4.0;       // s
  double walk_speed = 0.5;     // m/s
  double swing_period = 2.0;   // s
  BoneLengths bones;
  std::uint64_t seed = 0;
  /// Starting pelvis depth; negative selects the per-action default
  /// (3.5 m toward, 1.9 m away, 2.7 m swings).
  double start_depth = -1.0;
  double lateral_offset = 0.0;
  double phase = 0.0;          // rad, gait / swing phase offset
  int subject_id = 0;

  void validate() const;
};

SkeletonFrame skeleton_template(const BoneLengths& bones);

/// Pose of `action` at time t in [0, cfg.duration]. Throws std::domain_error
/// outside that range.
SkeletonFrame pose_at(Action action, double t, const MotionConfig& cfg);

/// Joint velocities (m/s) by central difference of the motion.
JointPositions joint_velocities(Action action, double t, const MotionConfig& cfg);

/// Swinging side implied by the pose: the arm whose elbow is above its shoulder.
SwingState swing_state_of(const JointPositions& joints);

/// Per-bone reflector amplitude; torso parts reflect most.
double bone_rcs(Joint child);

/// Samples `density` reflectors along each bone and expresses them in the
/// radar frame. Radial velocity is the interpolated joint velocity
/// projected onto the line of sight from the radar.
std::vector<Reflector> reflectors_from_skeleton(const SkeletonFrame& skel, const JointPositions& velocities,
                                                std::size_t density, const RadarPose& pose);
std::vector<Reflector> reflectors_from_skeleton(const SkeletonFrame& skel, std::size_t density,
                                                const RadarPose& pose);

/// One line of the dataset file: one radar's points for one frame.
struct DatasetRecord {
  std::int64_t frame_id = 0;
  std::int64_t t_ms = 0;
  int radar_id = 0;
  std::vector<RadarPoint> points;
  SkeletonFrame gt;
  bool fused = false;
  std::vector<int> radars;  // contributing radars, fused records only
};

struct SimulationConfig {
  std::vector<Action> actions{Action::kWalkToward, Action::kWalkAway, Action::kSwingRight, Action::kSwingLeft};
  int n_subjects = 2;
  /// Total frames; 0 means one episode per (action, subject).
  std::size_t n_frames = 0;
  MotionConfig motion;
  /// Vary speed, start depth, lateral offset and phase per episode.
  bool randomize_episodes = true;
  std::vector<RadarPose> radars{RadarPose::radar_a(), RadarPose::radar_b()};
  /// Per-radar clock offset relative to the ground-truth clock.
  std::vector<std::int64_t> radar_offsets_ms{0, 5};
  ChirpConfig chirp;
  DetectorConfig detector;
  std::size_t density = 4;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Records ordered by frame, then radar.
std::vector<DatasetRecord> simulate_records(const SimulationConfig& cfg);

/// simulate_records + write_dataset. Throws std::runtime_error when the
/// path cannot be written.
void generate_dataset(const SimulationConfig& cfg, const std::filesystem::path& out_path);

}  // namespace radarpose
