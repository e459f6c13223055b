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

#include <doctest.h>

#include "core/error.hpp"
#include "core/kin/chain.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace armkit;
using namespace armkit::kin;

namespace {

KinematicChain single_joint_chain(const Eigen::Vector3d& axis,
                                  const Eigen::Vector3d& pre_offset = Eigen::Vector3d::Zero()) {
  KinematicChain c;
  c.name = "single";
  JointSpec j;
  j.name = "j0";
  j.axis = axis;
  j.parent_offset = RigidTransform::from_translation(pre_offset);
  j.limit_lo = -kPi;
  j.limit_hi = kPi;
  c.joints = {j};
  c.end_effectors["tip"] = 0;
  c.validate();
  return c;
}

KinematicChain random_chain(Rng& rng, int n) {
  KinematicChain c;
  c.name = "random";
  for (int i = 0; i < n; ++i) {
    JointSpec j;
    j.name = "j" + std::to_string(i);
    Eigen::Vector3d axis(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    while (axis.norm() < 1e-3)
      axis = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    j.axis = axis.normalized();
    j.parent_offset = RigidTransform::from_rpy(
        rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
        {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
    j.limit_lo = -2.5;
    j.limit_hi = 2.5;
    c.joints.push_back(j);
  }
  c.base_pose = RigidTransform::from_rpy(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                         rng.uniform(-1, 1),
                                         {rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0});
  c.end_effectors["tip"] = n - 1;
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("builtin sophia_arm matches the production ratings") {
  const KinematicChain& arm = sophia_arm();
  REQUIRE(arm.joint_count() == 7);
  const char* names[] = {"Shoulder Pitch", "Shoulder Roll", "Shoulder Yaw", "Elbow",
                         "Wrist Yaw",      "Wrist Roll",    "Wrist Pitch"};
  for (int i = 0; i < 7; ++i) CHECK(arm.joints[i].name == names[i]);

  const JointSpec& elbow = arm.joints[3];
  CHECK(elbow.drive_ratio == 2.0);
  CHECK(elbow.max_output_torque == 2.018);
  CHECK(elbow.max_speed == deg2rad(159.0));
  CHECK(arm.joints[0].max_speed == deg2rad(90.0));
  CHECK(arm.joints[0].weight_to_handle_g == 2605);
  CHECK(arm.joints[2].actuator_label == "XM430-W350");
  CHECK(arm.end_effectors.count("palm") == 1);
}

TEST_CASE("chain validation rejects degenerate inputs") {
  KinematicChain empty;
  empty.name = "empty";
  CHECK_THROWS_AS(empty.validate(), Error);

  auto one = single_joint_chain(Eigen::Vector3d::UnitZ());
  CHECK(one.joint_count() == 1);

  auto bad_axis = one;
  bad_axis.joints[0].axis = {0, 0, 2};
  CHECK_THROWS_AS(bad_axis.validate(), Error);

  KinematicChain dup = one;
  dup.joints.push_back(dup.joints[0]);
  CHECK_THROWS_AS(dup.validate(), Error);
}

TEST_CASE("chain definition text round-trips") {
  const KinematicChain& arm = sophia_arm();
  KinematicChain re = parse_chain(chain_to_text(arm));
  REQUIRE(re.joint_count() == arm.joint_count());
  for (int i = 0; i < arm.joint_count(); ++i) {
    CHECK(re.joints[i].name == arm.joints[i].name);
    CHECK(re.joints[i].axis.isApprox(arm.joints[i].axis, 1e-12));
    CHECK(re.joints[i].limit_lo == doctest::Approx(arm.joints[i].limit_lo).epsilon(1e-12));
    CHECK(re.joints[i].max_speed == doctest::Approx(arm.joints[i].max_speed).epsilon(1e-12));
    CHECK(re.joints[i].drive_ratio == arm.joints[i].drive_ratio);
    CHECK(re.joints[i].max_output_torque == arm.joints[i].max_output_torque);
    CHECK(re.joints[i].parent_offset.translation.isApprox(arm.joints[i].parent_offset.translation,
                                                          1e-12));
  }
  CHECK(re.end_effectors == arm.end_effectors);
}

TEST_CASE("shipped sophia_arm.chain is the golden fixture") {
  KinematicChain file = load_chain(std::string(ARMKIT_DATA_DIR) + "/sophia_arm.chain");
  const KinematicChain& arm = sophia_arm();
  REQUIRE(file.joint_count() == arm.joint_count());
  for (int i = 0; i < arm.joint_count(); ++i) {
    CHECK(file.joints[i].name == arm.joints[i].name);
    CHECK(file.joints[i].drive_ratio == arm.joints[i].drive_ratio);
    CHECK(file.joints[i].max_output_torque == arm.joints[i].max_output_torque);
    CHECK(file.joints[i].max_speed == doctest::Approx(arm.joints[i].max_speed).epsilon(1e-12));
    CHECK(file.joints[i].weight_to_handle_g == arm.joints[i].weight_to_handle_g);
  }
}

TEST_CASE("chain parser rejects malformed documents") {
  CHECK_THROWS_AS(parse_chain("chain x\njoint \"a\" {\n axis 0 0 1\n"), Error);  // unterminated
  CHECK_THROWS_AS(parse_chain("chain x\nnonsense 1 2 3\n"), Error);
  CHECK_THROWS_AS(parse_chain("chain x\n"), Error);  // no joints
  // duplicate joint names
  std::string dup =
      "chain x\n"
      "joint \"a\" {\n axis 0 0 1\n}\n"
      "joint \"a\" {\n axis 0 0 1\n}\n";
  CHECK_THROWS_AS(parse_chain(dup), Error);
  // non-unit axis
  std::string bad_axis = "chain x\njoint \"a\" {\n axis 0 0 3\n}\n";
  CHECK_THROWS_AS(parse_chain(bad_axis), Error);
}

TEST_CASE("forward kinematics: home pose is the product of offsets") {
  const KinematicChain& arm = sophia_arm();
  JointState zeros(7, 0.0);
  auto pose = forward_kinematics(arm, zeros, "palm");
  RigidTransform expect = arm.base_pose;
  for (const auto& j : arm.joints) expect = expect * j.parent_offset;
  CHECK((pose.translation - expect.translation).norm() < 1e-12);
  CHECK((pose.rotation - expect.rotation).norm() < 1e-12);
  // shoulder at origin, upper arm 0.28 + forearm 0.25 hanging along -z
  CHECK(pose.translation.z() == doctest::Approx(-0.53));
}

TEST_CASE("forward kinematics: one z joint with a leading offset") {
  auto c = single_joint_chain(Eigen::Vector3d::UnitZ(), {1, 0, 0});
  auto pose = forward_kinematics(c, {kPi / 2}, "tip");
  CHECK(pose.translation.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  Eigen::Matrix3d rz = Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  CHECK((pose.rotation - rz).norm() < 1e-12);
}

TEST_CASE("forward kinematics: wrong state length is an error") {
  CHECK_THROWS_AS(forward_kinematics(sophia_arm(), JointState(3, 0.0)), Error);
}

TEST_CASE("forward kinematics matches the homogeneous-matrix oracle") {
  Rng rng(11);
  const KinematicChain& arm = sophia_arm();
  for (int trial = 0; trial < 50; ++trial) {
    JointState q(7);
    for (int i = 0; i < 7; ++i)
      q[i] = rng.uniform(arm.joints[i].limit_lo, arm.joints[i].limit_hi);
    auto frames = joint_frames(arm, q);
    auto oracle = oracles::fk_matrix_chain(arm, q);
    for (int i = 0; i < 7; ++i) {
      CHECK((frames[i].translation - oracle[i].block<3, 1>(0, 3)).norm() < 1e-9);
      CHECK((frames[i].rotation - oracle[i].block<3, 3>(0, 0)).norm() < 1e-9);
    }
  }
}

TEST_CASE("numeric jacobian: omega cross r for a single z joint") {
  // joint at the origin, tip carried 1 m along +x by a second frame joint
  KinematicChain c;
  JointSpec j0, j1;
  j0.name = "j0";
  j0.axis = Eigen::Vector3d::UnitZ();
  j1.name = "tip_frame";
  j1.axis = Eigen::Vector3d::UnitZ();
  j1.parent_offset = RigidTransform::from_translation({1, 0, 0});
  c.joints = {j0, j1};
  c.end_effectors["tip"] = 1;
  c.validate();

  auto jac = numeric_jacobian(c, {0.0, 0.0}, "tip");
  CHECK((jac.block<3, 1>(0, 0) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-6);
  CHECK(jac.block<3, 1>(0, 1).norm() < 1e-6);  // rotating the tip frame moves nothing
  CHECK((jac.block<3, 1>(3, 0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-6);
}

TEST_CASE("numeric jacobian: zero-length chain has zero position rows") {
  KinematicChain c;
  for (int i = 0; i < 3; ++i) {
    JointSpec j;
    j.name = "j" + std::to_string(i);
    j.axis = Eigen::Vector3d::UnitZ();
    c.joints.push_back(j);
  }
  c.end_effectors["tip"] = 2;
  c.validate();
  auto jac = numeric_jacobian(c, {0.3, -0.2, 0.9}, "tip");
  CHECK(jac.topRows(3).norm() < 1e-6);
}

TEST_CASE("numeric jacobian matches the geometric oracle on random chains") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_index(6));  // up to 7 joints
    auto c = random_chain(rng, n);
    JointState q(n);
    for (int i = 0; i < n; ++i) q[i] = rng.uniform(-2.0, 2.0);
    auto jac = numeric_jacobian(c, q, "tip");
    auto oracle = oracles::geometric_jacobian(c, q, n - 1);
    CHECK((jac - oracle).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("numeric jacobian: masked joints give zero columns") {
  const KinematicChain& arm = sophia_arm();
  JointState q(7, 0.2);
  std::vector<uint8_t> mask(7, 1);
  mask[2] = 0;
  mask[6] = 0;
  auto jac = numeric_jacobian(arm, q, "palm", &mask);
  CHECK(jac.col(2).norm() == 0.0);
  CHECK(jac.col(6).norm() == 0.0);
  CHECK(jac.col(0).norm() > 0.0);
}

TEST_CASE("clamp_to_limits") {
  const KinematicChain& arm = sophia_arm();
  JointState in(7, 0.1);
  CHECK(clamp_to_limits(arm, in) == in);

  JointState high(7, 0.0);
  high[0] = arm.joints[0].limit_hi + 0.1;
  auto clamped = clamp_to_limits(arm, high);
  CHECK(clamped[0] == arm.joints[0].limit_hi);

  JointState huge(7, 1e18);
  auto all_high = clamp_to_limits(arm, huge);
  for (int i = 0; i < 7; ++i) CHECK(all_high[i] == arm.joints[i].limit_hi);
  CHECK(clamp_to_limits(arm, all_high) == all_high);  // idempotent
}

TEST_CASE("min_travel_time") {
  const KinematicChain& arm = sophia_arm();
  JointState from(7, 0.0), to(7, 0.0);
  CHECK(min_travel_time(arm, from, to) == 0.0);

  to[0] = deg2rad(90.0);  // shoulder pitch at 90 deg/s
  CHECK(min_travel_time(arm, from, to) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    JointState a(7), b(7);
    for (int i = 0; i < 7; ++i) {
      a[i] = rng.uniform(arm.joints[i].limit_lo, arm.joints[i].limit_hi);
      b[i] = rng.uniform(arm.joints[i].limit_lo, arm.joints[i].limit_hi);
    }
    double brute = 0.0;
    for (int i = 0; i < 7; ++i)
      brute = std::max(brute, std::abs(a[i] - b[i]) / arm.joints[i].max_speed);
    CHECK(min_travel_time(arm, a, b) == doctest::Approx(brute).epsilon(1e-12));
  }
}
