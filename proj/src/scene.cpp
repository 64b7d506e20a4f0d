#include "radarpose/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "radarpose/dataset_io.hpp"

namespace radarpose {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double deg(double d) { return d * kPi / 180.0; }

struct LimbAngles {
  double hip_flex = 0.0;
  double knee_flex = 0.0;
  double arm_abduction = 0.0;
  double arm_flex = 0.0;
  double elbow_flex = 0.0;
};

struct BodyState {
  Vec3 pelvis{0.0, kRestDepth, 0.0};  // z is filled from the leg lengths
  bool facing_radar = true;
  LimbAngles left;
  LimbAngles right;
};

// Forward kinematics in a body frame (x to the subject's left, y forward,
// z up, origin at the pelvis), then placed in the world.
JointPositions forward_kinematics(const BoneLengths& b, const BodyState& s) {
  using J = Joint;
  JointPositions body{};
  auto put = [&](J child, J parent, double len, const Vec3& dir) {
    body[idx(child)] = body[idx(parent)] + len * dir.normalized();
  };

  body[idx(J::kPelvis)] = Vec3::Zero();
  put(J::kSpineNavel, J::kPelvis, b.spine_lower, {0, 0, 1});
  put(J::kSpineChest, J::kSpineNavel, b.spine_upper, {0, 0, 1});
  put(J::kNeck, J::kSpineChest, b.neck, {0, 0, 1});
  put(J::kHead, J::kNeck, b.head, {0, 0, 1});
  put(J::kNose, J::kHead, b.nose, {0, 1, 0});

  for (const double side : {1.0, -1.0}) {
    const bool left = side > 0;
    const LimbAngles& a = left ? s.left : s.right;
    auto pick = [left](J l, J r) { return left ? l : r; };

    put(pick(J::kEyeLeft, J::kEyeRight), J::kHead, b.eye, {side * 0.35, 1.0, 0.3});
    put(pick(J::kEarLeft, J::kEarRight), J::kHead, b.ear, {side, 0.0, 0.0});

    const J clav = pick(J::kClavicleLeft, J::kClavicleRight);
    const J shoulder = pick(J::kShoulderLeft, J::kShoulderRight);
    const J elbow = pick(J::kElbowLeft, J::kElbowRight);
    const J wrist = pick(J::kWristLeft, J::kWristRight);
    const J hand = pick(J::kHandLeft, J::kHandRight);
    put(clav, J::kSpineChest, b.clavicle, {side * 0.5, 0.0, 1.0});
    put(shoulder, clav, b.shoulder, {side, 0.0, 0.0});
    const double ab = a.arm_abduction;
    const Vec3 upper(side * std::sin(ab) * std::cos(a.arm_flex), std::sin(a.arm_flex),
                     -std::cos(ab) * std::cos(a.arm_flex));
    const double fl = a.arm_flex + a.elbow_flex;
    const Vec3 fore(side * std::sin(ab) * std::cos(fl), std::sin(fl), -std::cos(ab) * std::cos(fl));
    put(elbow, shoulder, b.upper_arm, upper);
    put(wrist, elbow, b.forearm, fore);
    put(hand, wrist, b.hand, fore);
    put(pick(J::kHandTipLeft, J::kHandTipRight), hand, b.handtip, fore);
    put(pick(J::kThumbLeft, J::kThumbRight), wrist, b.thumb, fore + Vec3(0.0, 0.5, 0.0));

    const J hip = pick(J::kHipLeft, J::kHipRight);
    const J knee = pick(J::kKneeLeft, J::kKneeRight);
    const J ankle = pick(J::kAnkleLeft, J::kAnkleRight);
    put(hip, J::kPelvis, b.hip_half_width, {side, 0.0, 0.0});
    put(knee, hip, b.thigh, {0.0, std::sin(a.hip_flex), -std::cos(a.hip_flex)});
    const double shin_angle = a.hip_flex - a.knee_flex;
    put(ankle, knee, b.shin, {0.0, std::sin(shin_angle), -std::cos(shin_angle)});
    put(pick(J::kFootLeft, J::kFootRight), ankle, b.foot, {0.0, std::cos(shin_angle), std::sin(shin_angle)});
  }

  const double pelvis_height = b.ankle_height + b.shin + b.thigh;
  const Vec3 origin(s.pelvis.x(), s.pelvis.y(), pelvis_height);
  // Facing the radar the subject's left is +x and forward is -y; facing
  // away both flip.
  const double fx = s.facing_radar ? 1.0 : -1.0;
  JointPositions world{};
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const Vec3& p = body[i];
    world[i] = origin + Vec3(fx * p.x(), -fx * p.y(), p.z());
  }
  return world;
}

double default_start_depth(Action a) {
  switch (a) {
    case Action::kWalkToward: return kMaxDepth;
    case Action::kWalkAway: return kMinDepth;
    default: return kRestDepth;
  }
}

// Unchecked in t so velocities can be differenced at the sequence ends.
BodyState body_state(Action action, double t, const MotionConfig& cfg) {
  BodyState s;
  const double start = cfg.start_depth >= 0.0 ? cfg.start_depth : default_start_depth(action);
  s.pelvis.x() = cfg.lateral_offset;

  if (action == Action::kWalkToward || action == Action::kWalkAway) {
    const double dir = action == Action::kWalkToward ? -1.0 : 1.0;
    const double unclamped = start + dir * cfg.walk_speed * t;
    s.pelvis.y() = std::clamp(unclamped, kMinDepth, kMaxDepth);
    s.facing_radar = action == Action::kWalkToward;
    // Stepping stops once the subject reaches the end of the track.
    const bool moving = unclamped > kMinDepth && unclamped < kMaxDepth && cfg.walk_speed > 0.0;
    const double stride = 1.2;  // m per full gait cycle
    const double psi = moving ? 2.0 * kPi * cfg.walk_speed * t / stride + cfg.phase : 0.0;
    const double amp = moving ? 1.0 : 0.0;
    s.left.hip_flex = amp * deg(25.0) * std::sin(psi);
    s.right.hip_flex = -amp * deg(25.0) * std::sin(psi);
    s.left.knee_flex = amp * deg(35.0) * std::max(0.0, std::sin(psi + kPi / 2.0));
    s.right.knee_flex = amp * deg(35.0) * std::max(0.0, -std::sin(psi + kPi / 2.0));
    s.left.arm_flex = -amp * deg(20.0) * std::sin(psi);
    s.right.arm_flex = amp * deg(20.0) * std::sin(psi);
    s.left.elbow_flex = s.right.elbow_flex = deg(15.0);
  } else {
    s.pelvis.y() = std::clamp(start, kMinDepth, kMaxDepth);
    s.facing_radar = true;
    const double raise = deg(150.0) * 0.5 * (1.0 - std::cos(2.0 * kPi * t / cfg.swing_period + cfg.phase));
    LimbAngles& swinging = action == Action::kSwingRight ? s.right : s.left;
    LimbAngles& resting = action == Action::kSwingRight ? s.left : s.right;
    swinging.arm_abduction = raise;
    swinging.elbow_flex = deg(10.0);
    resting.elbow_flex = deg(10.0);
  }
  return s;
}

JointPositions joints_at(Action action, double t, const MotionConfig& cfg) {
  return forward_kinematics(cfg.bones, body_state(action, t, cfg));
}

}  // namespace

void BoneLengths::validate() const {
  for (double v : {hip_half_width, thigh, shin, ankle_height, foot, spine_lower, spine_upper, neck, head, clavicle,
                   shoulder, upper_arm, forearm, hand, handtip, thumb, nose, eye, ear}) {
    if (!(v > 0.0)) throw std::invalid_argument("BoneLengths: every length must be positive");
  }
}

BoneLengths BoneLengths::for_subject(int id) {
  BoneLengths b;
  if (id == 0) return b;
  // Shorter, slightly stockier profile for odd ids, taller for even ones.
  const double scale = (id % 2 == 1) ? 0.92 : 1.05;
  for (double* v : {&b.hip_half_width, &b.thigh, &b.shin, &b.ankle_height, &b.foot, &b.spine_lower, &b.spine_upper,
                    &b.neck, &b.head, &b.clavicle, &b.shoulder, &b.upper_arm, &b.forearm, &b.hand, &b.handtip,
                    &b.thumb, &b.nose, &b.eye, &b.ear})
    *v *= scale;
  if (id % 2 == 1) b.hip_half_width *= 1.1;
  return b;
}

double standing_height(const BoneLengths& b) {
  return b.ankle_height + b.shin + b.thigh + b.spine_lower + b.spine_upper + b.neck + b.head;
}

void MotionConfig::validate() const {
  if (!(fps > 0.0)) throw std::invalid_argument("MotionConfig: fps must be positive");
  if (!(duration >= 0.0)) throw std::invalid_argument("MotionConfig: duration must be non-negative");
  if (!(walk_speed >= 0.0)) throw std::invalid_argument("MotionConfig: walk_speed must be non-negative");
  if (!(swing_period > 0.0)) throw std::invalid_argument("MotionConfig: swing_period must be positive");
  bones.validate();
}

SkeletonFrame skeleton_template(const BoneLengths& bones) {
  bones.validate();
  SkeletonFrame f;
  f.joints = forward_kinematics(bones, BodyState{});
  f.swing_state = SwingState::kNone;
  return f;
}

SwingState swing_state_of(const JointPositions& j) {
  const bool left = j[idx(Joint::kElbowLeft)].z() > j[idx(Joint::kShoulderLeft)].z();
  const bool right = j[idx(Joint::kElbowRight)].z() > j[idx(Joint::kShoulderRight)].z();
  if (left == right) return SwingState::kNone;
  return left ? SwingState::kLeft : SwingState::kRight;
}

SkeletonFrame pose_at(Action action, double t, const MotionConfig& cfg) {
  if (!(t >= 0.0 && t <= cfg.duration)) throw std::domain_error("pose_at: t outside [0, duration]");
  SkeletonFrame f;
  f.joints = joints_at(action, t, cfg);
  f.t_ms = static_cast<std::int64_t>(std::llround(t * 1000.0));
  f.action = action;
  f.subject_id = cfg.subject_id;
  f.swing_state = swing_state_of(f.joints);
  return f;
}

JointPositions joint_velocities(Action action, double t, const MotionConfig& cfg) {
  constexpr double h = 1e-3;
  const auto ahead = joints_at(action, t + h, cfg);
  const auto behind = joints_at(action, t - h, cfg);
  JointPositions v{};
  for (std::size_t i = 0; i < kJointCount; ++i) v[i] = (ahead[i] - behind[i]) / (2.0 * h);
  return v;
}

double bone_rcs(Joint child) {
  using J = Joint;
  switch (child) {
    case J::kSpineNavel:
    case J::kSpineChest:
    case J::kHipLeft:
    case J::kHipRight:
    case J::kClavicleLeft:
    case J::kClavicleRight:
      return 1.0;
    case J::kNeck:
    case J::kHead:
      return 0.7;
    case J::kKneeLeft:
    case J::kKneeRight:
    case J::kAnkleLeft:
    case J::kAnkleRight:
      return 0.6;
    case J::kShoulderLeft:
    case J::kShoulderRight:
    case J::kElbowLeft:
    case J::kElbowRight:
    case J::kWristLeft:
    case J::kWristRight:
      return 0.5;
    default:
      return 0.2;
  }
}

std::vector<Reflector> reflectors_from_skeleton(const SkeletonFrame& skel, const JointPositions& velocities,
                                                std::size_t density, const RadarPose& pose) {
  if (density < 1) throw std::invalid_argument("reflectors_from_skeleton: density must be >= 1");
  const Vec3 radar = pose.origin();
  std::vector<Reflector> out;
  out.reserve(kBoneCount * density);
  for (Joint child : bone_children()) {
    const Joint parent = *joint_parent(child);
    const Vec3& p0 = skel.joints[idx(parent)];
    const Vec3& p1 = skel.joints[idx(child)];
    const Vec3& v0 = velocities[idx(parent)];
    const Vec3& v1 = velocities[idx(child)];
    for (std::size_t i = 0; i < density; ++i) {
      const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(density);
      const Vec3 p = p0 + frac * (p1 - p0);
      const Vec3 v = v0 + frac * (v1 - v0);
      const Vec3 los = (p - radar).normalized();
      out.push_back({world_to_radar(p, pose), v.dot(los), bone_rcs(child)});
    }
  }
  return out;
}

std::vector<Reflector> reflectors_from_skeleton(const SkeletonFrame& skel, std::size_t density,
                                                const RadarPose& pose) {
  JointPositions still{};
  still.fill(Vec3::Zero());
  return reflectors_from_skeleton(skel, still, density, pose);
}

void SimulationConfig::validate() const {
  if (actions.empty()) throw std::invalid_argument("SimulationConfig: at least one action required");
  if (radars.empty()) throw std::invalid_argument("SimulationConfig: at least one radar required");
  if (n_subjects < 1) throw std::invalid_argument("SimulationConfig: at least one subject required");
  if (!radar_offsets_ms.empty() && radar_offsets_ms.size() < radars.size())
    throw std::invalid_argument("SimulationConfig: one clock offset per radar required");
  for (const auto& r : radars) r.validate();
  motion.validate();
  chirp.validate();
}

std::vector<DatasetRecord> simulate_records(const SimulationConfig& cfg) {
  cfg.validate();
  const auto frames_per_episode = static_cast<std::size_t>(std::llround(cfg.motion.duration * cfg.motion.fps));
  if (frames_per_episode == 0) throw std::invalid_argument("simulate_records: episode has no frames");
  const std::size_t n_actions = cfg.actions.size();
  const auto n_subjects = static_cast<std::size_t>(cfg.n_subjects);
  const std::size_t total = cfg.n_frames > 0 ? cfg.n_frames : frames_per_episode * n_actions * n_subjects;

  std::vector<DatasetRecord> records;
  records.reserve(total * cfg.radars.size());
  const double frame_dt_ms = 1000.0 / cfg.motion.fps;

  std::size_t frame_id = 0;
  for (std::size_t episode = 0; frame_id < total; ++episode) {
    const Action action = cfg.actions[episode % n_actions];
    const int subject = static_cast<int>((episode / n_actions) % n_subjects);

    MotionConfig m = cfg.motion;
    m.subject_id = subject;
    m.bones = subject == 0 ? cfg.motion.bones : BoneLengths::for_subject(subject);
    if (cfg.randomize_episodes) {
      std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (episode + 1)));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      m.walk_speed = cfg.motion.walk_speed * (0.8 + 0.4 * u(rng));
      m.swing_period = cfg.motion.swing_period * (0.8 + 0.4 * u(rng));
      m.lateral_offset = cfg.motion.lateral_offset + 0.3 * (u(rng) - 0.5);
      m.phase = 2.0 * kPi * u(rng);
      const double jitter = 0.3 * u(rng);
      const double swing_depth = kMinDepth + (kMaxDepth - kMinDepth) * u(rng);
      switch (action) {
        case Action::kWalkToward: m.start_depth = kMaxDepth - jitter; break;
        case Action::kWalkAway: m.start_depth = kMinDepth + jitter; break;
        default: m.start_depth = swing_depth; break;
      }
    }

    for (std::size_t k = 0; k < frames_per_episode && frame_id < total; ++k, ++frame_id) {
      const double t = static_cast<double>(k) / m.fps;
      SkeletonFrame gt = pose_at(action, t, m);
      const auto t_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(frame_id) * frame_dt_ms));
      gt.t_ms = t_ms;

      for (std::size_t r = 0; r < cfg.radars.size(); ++r) {
        const std::int64_t offset = cfg.radar_offsets_ms.empty() ? 0 : cfg.radar_offsets_ms[r];
        const double t_radar = t + static_cast<double>(offset) / 1000.0;
        SkeletonFrame seen = gt;
        seen.joints = joints_at(action, t_radar, m);
        const auto vel = joint_velocities(action, t_radar, m);
        const auto reflectors = reflectors_from_skeleton(seen, vel, cfg.density, cfg.radars[r]);
        const std::uint64_t noise_seed = cfg.seed * 1'000'003ULL + frame_id * 16ULL + r;
        const RawFrame raw = synthesize_frame(reflectors, cfg.chirp, noise_seed, t_ms + offset);
        const auto dets = detect_points(raw, cfg.detector);

        DatasetRecord rec;
        rec.frame_id = static_cast<std::int64_t>(frame_id);
        rec.t_ms = t_ms + offset;
        rec.radar_id = static_cast<int>(r);
        rec.points = detections_to_points(dets, rec.t_ms).points;
        rec.gt = gt;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

void generate_dataset(const SimulationConfig& cfg, const std::filesystem::path& out_path) {
  write_dataset(out_path, simulate_records(cfg));
}

}  // namespace radarpose
