#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "radarpose/point.hpp"

namespace radarpose {

/// 32-joint body model in the Azure Kinect ordering.
enum class Joint : std::size_t {
  kPelvis,
  kSpineNavel,
  kSpineChest,
  kNeck,
  kClavicleLeft,
  kShoulderLeft,
  kElbowLeft,
  kWristLeft,
  kHandLeft,
  kHandTipLeft,
  kThumbLeft,
  kClavicleRight,
  kShoulderRight,
  kElbowRight,
  kWristRight,
  kHandRight,
  kHandTipRight,
  kThumbRight,
  kHipLeft,
  kKneeLeft,
  kAnkleLeft,
  kFootLeft,
  kHipRight,
  kKneeRight,
  kAnkleRight,
  kFootRight,
  kHead,
  kNose,
  kEyeLeft,
  kEarLeft,
  kEyeRight,
  kEarRight,
};

inline constexpr std::size_t kJointCount = 32;
inline constexpr std::size_t kBoneCount = kJointCount - 1;

constexpr std::size_t idx(Joint j) { return static_cast<std::size_t>(j); }

std::string_view joint_name(Joint j);
std::optional<Joint> joint_from_name(std::string_view name);

/// Parent in the kinematic tree; the pelvis is the root and has none.
std::optional<Joint> joint_parent(Joint j);

/// Left/right counterpart; midline joints map to themselves.
Joint mirror_joint(Joint j);

/// Child joint of every bone, in joint order (pelvis excluded).
const std::array<Joint, kBoneCount>& bone_children();

using JointPositions = std::array<Vec3, kJointCount>;

enum class Action { kWalkToward, kWalkAway, kSwingRight, kSwingLeft };
enum class SwingState { kNone, kLeft, kRight };

std::string_view action_name(Action a);
/// Throws std::invalid_argument for an unknown name.
Action action_from_name(std::string_view name);
std::string_view swing_state_name(SwingState s);
SwingState swing_state_from_name(std::string_view name);
bool is_swing(Action a);

/// Ground-truth pose for one instant. World frame: x lateral, y depth away
/// from the radar line, z up from the floor.
struct SkeletonFrame {
  JointPositions joints{};
  std::int64_t t_ms = 0;
  Action action = Action::kWalkToward;
  int subject_id = 0;
  SwingState swing_state = SwingState::kNone;
};

/// Joints dropped from regression by default: wrists, hands, hand tips,
/// thumbs and eyes on both sides (32 - 10 = 22 keypoints).
std::vector<Joint> default_excluded_joints();
std::vector<Joint> included_joints(const std::vector<Joint>& excluded);

/// Hips, knees, ankles, feet.
std::vector<Joint> lower_body_joints();
/// Shoulders and elbows.
std::vector<Joint> arm_joints();

}  // namespace radarpose
