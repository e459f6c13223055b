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

#include <Eigen/Dense>

namespace armkit {

/// Proper rigid transform (rotation + translation), meters and radians.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }

  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                        const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t};
  }

  /// Builds from XYZ-fixed-axis (roll, pitch, yaw) angles.
  static RigidTransform from_rpy(double roll, double pitch, double yaw,
                                 const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    Eigen::Matrix3d r = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                         Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                         Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
                            .toRotationMatrix();
    return {r, t};
  }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -inv.rotation * translation;
    return inv;
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  bool is_valid(double tol = 1e-9) const {
    return (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-6 &&
           std::abs(rotation.determinant() - 1.0) < tol;
  }
};

/// Rotation vector (axis * angle) of r, the log map of SO(3).
inline Eigen::Vector3d rotation_log(const Eigen::Matrix3d& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

/// Angle between two rotations: |log(a * b^T)|.
inline double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return rotation_log(a * b.transpose()).norm();
}

/// Wraps an angle into [-pi/2, pi/2] using pi-periodicity (grasp angles).
inline double wrap_half_pi(double angle) {
  const double pi = 3.14159265358979323846;
  double a = std::fmod(angle + pi / 2.0, pi);
  if (a < 0) a += pi;
  return a - pi / 2.0;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_pi(double angle) {
  const double two_pi = 6.28318530717958647692;
  double a = std::fmod(angle, two_pi);
  if (a <= -3.14159265358979323846) a += two_pi;
  if (a > 3.14159265358979323846) a -= two_pi;
  return a;
}

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace armkit
