// Copyright 2026 armkit developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace armkit::kin {

/// One revolute joint. The drive/torque/payload columns are actuator
/// metadata carried along for reporting and timing; only axis, offset and
/// limits enter the kinematics.
struct JointSpec {
  std::string name;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit norm
  RigidTransform parent_offset;                     // applied before the joint rotation
  double limit_lo = -kPi;
  double limit_hi = kPi;
  double max_speed = 1.0;          // rad/s, conservative (high-torque) operating point
  double drive_ratio = 1.0;        // output:motor
  double max_output_torque = 1.0;  // Nm at the output pulley/gear
  std::string actuator_label;
  std::string drive_type;          // pulley | spur_gears | bevel_gears | ...
  double weight_to_handle_g = 0.0; // rated payload, metadata only
  std::string feedback;

  void validate() const;
};

/// Serial chain of revolute joints. End-effectors are named joint indices;
/// the frame reported for an end-effector is the frame after that joint's
/// rotation.
struct KinematicChain {
  std::string name;
  std::vector<JointSpec> joints;
  RigidTransform base_pose;
  std::map<std::string, int> end_effectors;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int end_effector_index(const std::string& ee_name) const;
  std::optional<int> joint_index(const std::string& joint_name) const;

  void validate() const;
};

/// Joint angles in radians, one per joint, chain order.
using JointState = std::vector<double>;

/// Built-in reference arm: 7 revolute joints (Shoulder Pitch/Roll/Yaw,
/// Elbow, Wrist Yaw/Roll/Pitch) with the production ratio, torque and speed
/// ratings. Speeds use the high-torque operating point as the conservative
/// bound. End-effectors: "palm" and "pen_tip" at the wrist-pitch frame.
const KinematicChain& sophia_arm();

/// Looks up a built-in chain by name ("sophia_arm"). Returns nullptr when
/// unknown.
const KinematicChain* builtin_chain(const std::string& name);

/// Parses the chain definition text format (see docs/formats.md).
KinematicChain parse_chain(const std::string& text);

/// Reads and parses a chain definition file.
KinematicChain load_chain(const std::string& path);

/// Serializes a chain back to the definition text format.
std::string chain_to_text(const KinematicChain& chain);

/// Frames of every joint (after its rotation), base first entry excluded;
/// frames[i] corresponds to joints[i].
std::vector<RigidTransform> joint_frames(const KinematicChain& chain, const JointState& state);

/// Pose of every named end-effector.
std::map<std::string, RigidTransform> forward_kinematics(const KinematicChain& chain,
                                                         const JointState& state);

/// Pose of one end-effector.
RigidTransform forward_kinematics(const KinematicChain& chain, const JointState& state,
                                  const std::string& end_effector);

/// 6xN task Jacobian by central finite differences (step `fd_step`).
/// Rows 0-2: position (m/rad), rows 3-5: orientation (rad/rad), world frame.
/// When `active_joints` is non-null, columns of masked-out joints are zero.
Eigen::Matrix<double, 6, Eigen::Dynamic> numeric_jacobian(
    const KinematicChain& chain, const JointState& state, const std::string& end_effector,
    const std::vector<uint8_t>* active_joints = nullptr, double fd_step = 1e-6);

/// Componentwise clamp into joint limits. Idempotent.
JointState clamp_to_limits(const KinematicChain& chain, const JointState& state);

bool within_limits(const KinematicChain& chain, const JointState& state, double tol = 0.0);

/// Rest-to-rest lower bound for a synchronized joint-space move:
/// max over joints of |delta| / max_speed.
double min_travel_time(const KinematicChain& chain, const JointState& from, const JointState& to);

}  // namespace armkit::kin
