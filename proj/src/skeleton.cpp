#include "radarpose/skeleton.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace radarpose {
namespace {

struct JointInfo {
  std::string_view name;
  std::optional<Joint> parent;
  Joint mirror;
};

using J = Joint;

constexpr std::array<JointInfo, kJointCount> kJoints = {{
    {"pelvis", std::nullopt, J::kPelvis},
    {"spine_navel", J::kPelvis, J::kSpineNavel},
    {"spine_chest", J::kSpineNavel, J::kSpineChest},
    {"neck", J::kSpineChest, J::kNeck},
    {"clavicle_left", J::kSpineChest, J::kClavicleRight},
    {"shoulder_left", J::kClavicleLeft, J::kShoulderRight},
    {"elbow_left", J::kShoulderLeft, J::kElbowRight},
    {"wrist_left", J::kElbowLeft, J::kWristRight},
    {"hand_left", J::kWristLeft, J::kHandRight},
    {"handtip_left", J::kHandLeft, J::kHandTipRight},
    {"thumb_left", J::kWristLeft, J::kThumbRight},
    {"clavicle_right", J::kSpineChest, J::kClavicleLeft},
    {"shoulder_right", J::kClavicleRight, J::kShoulderLeft},
    {"elbow_right", J::kShoulderRight, J::kElbowLeft},
    {"wrist_right", J::kElbowRight, J::kWristLeft},
    {"hand_right", J::kWristRight, J::kHandLeft},
    {"handtip_right", J::kHandRight, J::kHandTipLeft},
    {"thumb_right", J::kWristRight, J::kThumbLeft},
    {"hip_left", J::kPelvis, J::kHipRight},
    {"knee_left", J::kHipLeft, J::kKneeRight},
    {"ankle_left", J::kKneeLeft, J::kAnkleRight},
    {"foot_left", J::kAnkleLeft, J::kFootRight},
    {"hip_right", J::kPelvis, J::kHipLeft},
    {"knee_right", J::kHipRight, J::kKneeLeft},
    {"ankle_right", J::kKneeRight, J::kAnkleLeft},
    {"foot_right", J::kAnkleRight, J::kFootLeft},
    {"head", J::kNeck, J::kHead},
    {"nose", J::kHead, J::kNose},
    {"eye_left", J::kHead, J::kEyeRight},
    {"ear_left", J::kHead, J::kEarRight},
    {"eye_right", J::kHead, J::kEyeLeft},
    {"ear_right", J::kHead, J::kEarLeft},
}};

}  // namespace

std::string_view joint_name(Joint j) { return kJoints.at(idx(j)).name; }

std::optional<Joint> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i)
    if (kJoints[i].name == name) return static_cast<Joint>(i);
  return std::nullopt;
}

std::optional<Joint> joint_parent(Joint j) { return kJoints.at(idx(j)).parent; }

Joint mirror_joint(Joint j) { return kJoints.at(idx(j)).mirror; }

const std::array<Joint, kBoneCount>& bone_children() {
  static const auto children = [] {
    std::array<Joint, kBoneCount> out{};
    for (std::size_t i = 1; i < kJointCount; ++i) out[i - 1] = static_cast<Joint>(i);
    return out;
  }();
  return children;
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kWalkToward: return "walk_toward";
    case Action::kWalkAway: return "walk_away";
    case Action::kSwingRight: return "swing_right";
    case Action::kSwingLeft: return "swing_left";
  }
  throw std::invalid_argument("unknown action");
}

Action action_from_name(std::string_view name) {
  for (Action a : {Action::kWalkToward, Action::kWalkAway, Action::kSwingRight, Action::kSwingLeft})
    if (action_name(a) == name) return a;
  throw std::invalid_argument("unknown action: " + std::string(name));
}

std::string_view swing_state_name(SwingState s) {
  switch (s) {
    case SwingState::kNone: return "none";
    case SwingState::kLeft: return "left";
    case SwingState::kRight: return "right";
  }
  throw std::invalid_argument("unknown swing state");
}

SwingState swing_state_from_name(std::string_view name) {
  for (SwingState s : {SwingState::kNone, SwingState::kLeft, SwingState::kRight})
    if (swing_state_name(s) == name) return s;
  throw std::invalid_argument("unknown swing state: " + std::string(name));
}

bool is_swing(Action a) { return a == Action::kSwingLeft || a == Action::kSwingRight; }

std::vector<Joint> default_excluded_joints() {
  return {J::kWristLeft, J::kHandLeft,  J::kHandTipLeft,  J::kThumbLeft,  J::kWristRight,
          J::kHandRight, J::kHandTipRight, J::kThumbRight, J::kEyeLeft, J::kEyeRight};
}

std::vector<Joint> included_joints(const std::vector<Joint>& excluded) {
  std::vector<Joint> out;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto j = static_cast<Joint>(i);
    if (std::find(excluded.begin(), excluded.end(), j) == excluded.end()) out.push_back(j);
  }
  return out;
}

std::vector<Joint> lower_body_joints() {
  return {J::kHipLeft, J::kKneeLeft, J::kAnkleLeft, J::kFootLeft,
          J::kHipRight, J::kKneeRight, J::kAnkleRight, J::kFootRight};
}

std::vector<Joint> arm_joints() {
  return {J::kShoulderLeft, J::kElbowLeft, J::kShoulderRight, J::kElbowRight};
}

}  // namespace radarpose
