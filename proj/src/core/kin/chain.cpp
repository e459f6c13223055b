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

#include "core/kin/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace armkit::kin {

void JointSpec::validate() const {
  if (name.empty()) fail(ErrorCode::invalid_argument, "joint with empty name");
  if (!(limit_lo < limit_hi))
    fail(ErrorCode::invalid_argument, "joint '" + name + "': limit_lo must be < limit_hi");
  if (!(max_speed > 0.0))
    fail(ErrorCode::invalid_argument, "joint '" + name + "': max_speed must be > 0");
  if (!(drive_ratio > 0.0))
    fail(ErrorCode::invalid_argument, "joint '" + name + "': drive_ratio must be > 0");
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    fail(ErrorCode::invalid_argument, "joint '" + name + "': axis must have unit norm");
}

int KinematicChain::end_effector_index(const std::string& ee_name) const {
  auto it = end_effectors.find(ee_name);
  if (it == end_effectors.end())
    fail(ErrorCode::invalid_argument, "unknown end-effector '" + ee_name + "'");
  return it->second;
}

std::optional<int> KinematicChain::joint_index(const std::string& joint_name) const {
  for (size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == joint_name) return static_cast<int>(i);
  return std::nullopt;
}

void KinematicChain::validate() const {
  if (joints.empty()) fail(ErrorCode::invalid_argument, "chain must have at least one joint");
  std::set<std::string> names;
  for (const auto& j : joints) {
    j.validate();
    if (!names.insert(j.name).second)
      fail(ErrorCode::parse, "duplicate joint name '" + j.name + "'");
  }
  for (const auto& [ee, idx] : end_effectors)
    if (idx < 0 || idx >= joint_count())
      fail(ErrorCode::invalid_argument, "end-effector '" + ee + "' index out of range");
}

namespace {

JointSpec make_joint(const std::string& name, const Eigen::Vector3d& axis,
                     const Eigen::Vector3d& offset, double lo, double hi, double speed_deg,
                     double ratio, double torque, const std::string& motor,
                     const std::string& drive, double weight_g, const std::string& feedback) {
  JointSpec j;
  j.name = name;
  j.axis = axis;
  j.parent_offset = RigidTransform::from_translation(offset);
  j.limit_lo = lo;
  j.limit_hi = hi;
  j.max_speed = deg2rad(speed_deg);
  j.drive_ratio = ratio;
  j.max_output_torque = torque;
  j.actuator_label = motor;
  j.drive_type = drive;
  j.weight_to_handle_g = weight_g;
  j.feedback = feedback;
  return j;
}

KinematicChain build_sophia_arm() {
  using V = Eigen::Vector3d;
  const std::string fb = "position, speed, acceleration, temperature";
  const std::string fb_pot = fb + ", potentiometer";

  KinematicChain c;
  c.name = "sophia_arm";
  // Shoulder cluster at the origin, arm hanging along -z at the zero pose;
  // upper arm 0.28 m, forearm 0.25 m. Limits are the working ranges used by
  // the desk-scale model; the rating columns are the production values.
  c.joints = {
      make_joint("Shoulder Pitch", V::UnitY(), {0, 0, 0}, -2.618, 2.618, 90.0, 2.0, 6.451,
                 "MX106R", "pulley", 2605, fb),
      make_joint("Shoulder Roll", V::UnitX(), {0, 0, 0}, -2.618, 2.618, 90.0, 2.0, 6.476,
                 "MX106R", "pulley", 2322, fb),
      make_joint("Shoulder Yaw", V::UnitZ(), {0, 0, 0}, -2.618, 2.618, 79.0, 2.917, 1.967,
                 "XM430-W350", "spur_gears", 1830, fb),
      make_joint("Elbow", V::UnitY(), {0, 0, -0.28}, -2.443, 2.443, 159.0, 2.0, 2.018, "MX64R",
                 "pulley", 1278, fb),
      make_joint("Wrist Yaw", V::UnitZ(), {0, 0, -0.25}, -1.745, 1.745, 150.0, 1.8, 0.315,
                 "XM430-W350", "bevel_gears", 946, fb),
      make_joint("Wrist Roll", V::UnitX(), {0, 0, 0}, -1.745, 1.745, 185.0, 1.33, 0.625,
                 "XM430-W350", "pulley", 384, fb_pot),
      make_joint("Wrist Pitch", V::UnitY(), {0, 0, 0}, -1.745, 1.745, 175.1, 1.467, 0.501,
                 "XM430-W350", "pulley", 371, fb_pot),
  };
  c.end_effectors = {{"palm", 6}, {"pen_tip", 6}};
  c.validate();
  return c;
}

}  // namespace

const KinematicChain& sophia_arm() {
  static const KinematicChain chain = build_sophia_arm();
  return chain;
}

const KinematicChain* builtin_chain(const std::string& name) {
  if (name == "sophia_arm") return &sophia_arm();
  return nullptr;
}

// ---------------------------------------------------------------------------
// Definition text format

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    if (line[i] == '"') {
      size_t end = line.find('"', i + 1);
      if (end == std::string::npos) fail(ErrorCode::parse, "unterminated quote: " + line);
      out.push_back(line.substr(i + 1, end - i - 1));
      i = end + 1;
    } else {
      size_t end = i;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      out.push_back(line.substr(i, end - i));
      i = end;
    }
  }
  return out;
}

double to_double(const std::string& tok) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(ErrorCode::parse, "expected number, got '" + tok + "'");
  }
  if (pos != tok.size()) fail(ErrorCode::parse, "expected number, got '" + tok + "'");
  return v;
}

RigidTransform parse_origin(const std::vector<std::string>& t, size_t from) {
  // rpy R P Y xyz X Y Z
  if (t.size() < from + 8 || t[from] != "rpy" || t[from + 4] != "xyz")
    fail(ErrorCode::parse, "origin expects 'rpy r p y xyz x y z'");
  return RigidTransform::from_rpy(
      to_double(t[from + 1]), to_double(t[from + 2]), to_double(t[from + 3]),
      {to_double(t[from + 5]), to_double(t[from + 6]), to_double(t[from + 7])});
}

}  // namespace

KinematicChain parse_chain(const std::string& text) {
  KinematicChain chain;
  std::istringstream in(text);
  std::string line;
  JointSpec* current = nullptr;
  JointSpec pending;
  bool in_joint = false;
  std::vector<std::pair<std::string, std::string>> ee_by_name;
  int lineno = 0;

  auto finish_joint = [&]() {
    chain.joints.push_back(pending);
    pending = JointSpec{};
    in_joint = false;
    current = nullptr;
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto t = tokenize(line);
    if (t.empty()) continue;
    const std::string& key = t[0];
    auto need = [&](size_t n) {
      if (t.size() < n + 1)
        fail(ErrorCode::parse, "line " + std::to_string(lineno) + ": '" + key +
                                   "' expects " + std::to_string(n) + " value(s)");
    };
    if (!in_joint) {
      if (key == "chain") {
        need(1);
        chain.name = t[1];
      } else if (key == "base") {
        chain.base_pose = parse_origin(t, 1);
      } else if (key == "joint") {
        need(1);
        if (t.size() < 3 || t[2] != "{")
          fail(ErrorCode::parse, "line " + std::to_string(lineno) + ": joint expects '{'");
        in_joint = true;
        pending = JointSpec{};
        pending.name = t[1];
        current = &pending;
      } else if (key == "end_effector") {
        need(2);
        ee_by_name.emplace_back(t[1], t[2]);
      } else {
        fail(ErrorCode::parse, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
      continue;
    }
    // inside a joint block
    if (key == "}") {
      finish_joint();
    } else if (key == "axis") {
      need(3);
      current->axis = {to_double(t[1]), to_double(t[2]), to_double(t[3])};
    } else if (key == "origin") {
      current->parent_offset = parse_origin(t, 1);
    } else if (key == "limits") {
      need(2);
      current->limit_lo = to_double(t[1]);
      current->limit_hi = to_double(t[2]);
    } else if (key == "max_speed_deg") {
      need(1);
      current->max_speed = deg2rad(to_double(t[1]));
    } else if (key == "max_speed") {
      need(1);
      current->max_speed = to_double(t[1]);
    } else if (key == "ratio") {
      need(1);
      current->drive_ratio = to_double(t[1]);
    } else if (key == "max_torque") {
      need(1);
      current->max_output_torque = to_double(t[1]);
    } else if (key == "motor") {
      need(1);
      current->actuator_label = t[1];
    } else if (key == "drive") {
      need(1);
      current->drive_type = t[1];
    } else if (key == "handles_g") {
      need(1);
      current->weight_to_handle_g = to_double(t[1]);
    } else if (key == "feedback") {
      need(1);
      current->feedback = t[1];
    } else {
      fail(ErrorCode::parse,
           "line " + std::to_string(lineno) + ": unknown joint key '" + key + "'");
    }
  }
  if (in_joint) fail(ErrorCode::parse, "unterminated joint block");

  for (const auto& [ee, joint_name] : ee_by_name) {
    auto idx = chain.joint_index(joint_name);
    if (!idx)
      fail(ErrorCode::parse, "end_effector '" + ee + "' refers to unknown joint '" +
                                 joint_name + "'");
    chain.end_effectors[ee] = *idx;
  }
  if (chain.end_effectors.empty() && !chain.joints.empty())
    chain.end_effectors["tip"] = chain.joint_count() - 1;
  chain.validate();
  return chain;
}

KinematicChain load_chain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open chain file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_chain(ss.str());
}

namespace {

void write_origin(std::ostream& out, const RigidTransform& tf) {
  // Recover XYZ-fixed rpy from the rotation matrix.
  const Eigen::Matrix3d& r = tf.rotation;
  double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-9) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "rpy %.12g %.12g %.12g xyz %.12g %.12g %.12g", roll + 0.0,
                pitch + 0.0, yaw + 0.0, tf.translation.x() + 0.0, tf.translation.y() + 0.0,
                tf.translation.z() + 0.0);
  out << buf;
}

}  // namespace

std::string chain_to_text(const KinematicChain& chain) {
  std::ostringstream out;
  out << "chain " << chain.name << "\n";
  out << "base ";
  write_origin(out, chain.base_pose);
  out << "\n\n";
  char buf[160];
  for (const auto& j : chain.joints) {
    out << "joint \"" << j.name << "\" {\n";
    std::snprintf(buf, sizeof(buf), "  axis %.12g %.12g %.12g\n", j.axis.x(), j.axis.y(),
                  j.axis.z());
    out << buf;
    out << "  origin ";
    write_origin(out, j.parent_offset);
    out << "\n";
    std::snprintf(buf, sizeof(buf), "  limits %.12g %.12g\n", j.limit_lo, j.limit_hi);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  max_speed_deg %.12g\n", rad2deg(j.max_speed));
    out << buf;
    std::snprintf(buf, sizeof(buf), "  ratio %.12g\n", j.drive_ratio);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  max_torque %.12g\n", j.max_output_torque);
    out << buf;
    if (!j.actuator_label.empty()) out << "  motor " << j.actuator_label << "\n";
    if (!j.drive_type.empty()) out << "  drive " << j.drive_type << "\n";
    std::snprintf(buf, sizeof(buf), "  handles_g %.12g\n", j.weight_to_handle_g);
    out << buf;
    if (!j.feedback.empty()) out << "  feedback \"" << j.feedback << "\"\n";
    out << "}\n\n";
  }
  for (const auto& [ee, idx] : chain.end_effectors)
    out << "end_effector " << ee << " \"" << chain.joints[idx].name << "\"\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Kinematics

std::vector<RigidTransform> joint_frames(const KinematicChain& chain, const JointState& state) {
  if (state.size() != chain.joints.size())
    fail(ErrorCode::invalid_argument, "joint state length does not match chain");
  std::vector<RigidTransform> frames;
  frames.reserve(chain.joints.size());
  RigidTransform t = chain.base_pose;
  for (size_t i = 0; i < chain.joints.size(); ++i) {
    const JointSpec& j = chain.joints[i];
    t = t * j.parent_offset * RigidTransform::from_axis_angle(j.axis, state[i]);
    frames.push_back(t);
  }
  return frames;
}

std::map<std::string, RigidTransform> forward_kinematics(const KinematicChain& chain,
                                                         const JointState& state) {
  auto frames = joint_frames(chain, state);
  std::map<std::string, RigidTransform> out;
  for (const auto& [ee, idx] : chain.end_effectors) out[ee] = frames[idx];
  return out;
}

RigidTransform forward_kinematics(const KinematicChain& chain, const JointState& state,
                                  const std::string& end_effector) {
  int idx = chain.end_effector_index(end_effector);
  return joint_frames(chain, state)[idx];
}

Eigen::Matrix<double, 6, Eigen::Dynamic> numeric_jacobian(
    const KinematicChain& chain, const JointState& state, const std::string& end_effector,
    const std::vector<uint8_t>* active_joints, double fd_step) {
  const int n = chain.joint_count();
  if (active_joints && static_cast<int>(active_joints->size()) != n)
    fail(ErrorCode::invalid_argument, "active_joints mask length does not match chain");
  const int ee = chain.end_effector_index(end_effector);

  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  jac.setZero();
  JointState q = state;
  for (int j = 0; j < n; ++j) {
    if (active_joints && !(*active_joints)[j]) continue;
    const double saved = q[j];
    q[j] = saved + fd_step;
    RigidTransform plus = joint_frames(chain, q)[ee];
    q[j] = saved - fd_step;
    RigidTransform minus = joint_frames(chain, q)[ee];
    q[j] = saved;
    jac.block<3, 1>(0, j) = (plus.translation - minus.translation) / (2.0 * fd_step);
    jac.block<3, 1>(3, j) =
        rotation_log(plus.rotation * minus.rotation.transpose()) / (2.0 * fd_step);
  }
  return jac;
}

JointState clamp_to_limits(const KinematicChain& chain, const JointState& state) {
  if (state.size() != chain.joints.size())
    fail(ErrorCode::invalid_argument, "joint state length does not match chain");
  JointState out = state;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(out[i], chain.joints[i].limit_lo, chain.joints[i].limit_hi);
  return out;
}

bool within_limits(const KinematicChain& chain, const JointState& state, double tol) {
  if (state.size() != chain.joints.size()) return false;
  for (size_t i = 0; i < state.size(); ++i)
    if (state[i] < chain.joints[i].limit_lo - tol || state[i] > chain.joints[i].limit_hi + tol)
      return false;
  return true;
}

double min_travel_time(const KinematicChain& chain, const JointState& from,
                       const JointState& to) {
  if (from.size() != chain.joints.size() || to.size() != chain.joints.size())
    fail(ErrorCode::invalid_argument, "joint state length does not match chain");
  double t = 0.0;
  for (size_t i = 0; i < from.size(); ++i)
    t = std::max(t, std::abs(to[i] - from[i]) / chain.joints[i].max_speed);
  return t;
}

}  // namespace armkit::kin
