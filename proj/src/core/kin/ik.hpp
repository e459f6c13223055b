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

#include <string>
#include <vector>

#include "core/kin/chain.hpp"

namespace armkit::kin {

/// One Cartesian task for the multi-task solver. Lower `priority` values are
/// solved first; lower-priority tasks act only in the nullspace of the
/// higher-priority stack. `active_joints` (empty = all) removes joints from
/// this task's actuation.
struct IkTask {
  std::string end_effector;
  RigidTransform target;
  double position_weight = 1.0;
  double orientation_weight = 0.0;
  std::vector<uint8_t> active_joints;  // empty or one flag per joint
  int priority = 1;
};

struct IkOptions {
  int max_iterations = 200;          // total budget, restarts included
  double tolerance = 1e-6;           // weighted residual norm
  double damping = 1e-2;             // base DLS damping
  double limit_margin = deg2rad(5.0);
  double limit_damping_boost = 10.0; // applied per joint inside the margin
  double max_step = 0.2;             // rad per iteration, norm cap
  double fd_step = 1e-6;             // Jacobian finite-difference step
  int stall_window = 12;             // iterations without improvement before re-seeding
  int polish_iterations = 24;        // budget tail run with only the top priority level
};

struct TaskResidual {
  double position_error = 0.0;     // meters
  double orientation_error = 0.0;  // radians
};

struct IkReport {
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
  double residual_norm = 0.0;  // weighted stacked norm at the returned state
  std::vector<TaskResidual> task_residuals;
};

struct IkResult {
  JointState state;
  IkReport report;
};

/// Damped-least-squares multi-task IK. Deterministic for identical inputs;
/// the returned state always satisfies the joint limits. On non-convergence
/// the best state found is returned with report.converged = false.
IkResult solve_ik(const KinematicChain& chain, const JointState& seed,
                  const std::vector<IkTask>& tasks, const IkOptions& opts = {});

}  // namespace armkit::kin
