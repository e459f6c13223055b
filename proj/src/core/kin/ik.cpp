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

#include "core/kin/ik.hpp"

#include <algorithm>
#include <map>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace armkit::kin {

namespace {

struct TaskError {
  Eigen::Vector3d position;     // unweighted, meters
  Eigen::Vector3d orientation;  // unweighted rotation vector, radians
};

std::vector<TaskError> task_errors(const KinematicChain& chain, const JointState& q,
                                   const std::vector<IkTask>& tasks) {
  auto frames = joint_frames(chain, q);
  std::vector<TaskError> out(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    const RigidTransform& cur = frames[chain.end_effector_index(tasks[i].end_effector)];
    out[i].position = tasks[i].target.translation - cur.translation;
    out[i].orientation = rotation_log(tasks[i].target.rotation * cur.rotation.transpose());
  }
  return out;
}

double weighted_norm(const std::vector<IkTask>& tasks, const std::vector<TaskError>& errs) {
  double sq = 0.0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    sq += tasks[i].position_weight * tasks[i].position_weight * errs[i].position.squaredNorm();
    sq += tasks[i].orientation_weight * tasks[i].orientation_weight *
          errs[i].orientation.squaredNorm();
  }
  return std::sqrt(sq);
}

// Weighted residual norm per priority level, ascending priority order.
std::vector<double> level_norms(const std::map<int, std::vector<size_t>>& levels,
                                const std::vector<IkTask>& tasks,
                                const std::vector<TaskError>& errs) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (const auto& [priority, idxs] : levels) {
    double sq = 0.0;
    for (size_t i : idxs) {
      sq += tasks[i].position_weight * tasks[i].position_weight * errs[i].position.squaredNorm();
      sq += tasks[i].orientation_weight * tasks[i].orientation_weight *
            errs[i].orientation.squaredNorm();
    }
    out.push_back(std::sqrt(sq));
  }
  return out;
}

// Strict-priority comparison: a is better than b when it improves some level
// by more than `band` without losing a higher-priority level by more.
bool lex_better(const std::vector<double>& a, const std::vector<double>& b, double band) {
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k] - band) return true;
    if (a[k] > b[k] + band) return false;
  }
  return false;
}

// Rank-truncated pseudoinverse used only to build the nullspace projector.
Eigen::MatrixXd null_projector(const Eigen::MatrixXd& j) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = (sv.size() ? sv(0) : 0.0) * 1e-8;
  Eigen::MatrixXd v = svd.matrixV();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(j.cols(), j.cols());
  for (int k = 0; k < sv.size(); ++k) {
    if (sv(k) > thresh) p -= v.col(k) * v.col(k).transpose();
  }
  return p;
}

}  // namespace

IkResult solve_ik(const KinematicChain& chain, const JointState& seed,
                  const std::vector<IkTask>& tasks, const IkOptions& opts) {
  const int n = chain.joint_count();
  if (tasks.empty()) fail(ErrorCode::invalid_argument, "solve_ik: task list is empty");
  if (static_cast<int>(seed.size()) != n)
    fail(ErrorCode::invalid_argument, "solve_ik: seed length does not match chain");
  if (!within_limits(chain, seed, 1e-12))
    fail(ErrorCode::invalid_argument, "solve_ik: seed violates joint limits");

  bool any_active = false;
  for (const auto& t : tasks) {
    chain.end_effector_index(t.end_effector);  // validates the name
    if (t.position_weight < 0 || t.orientation_weight < 0 ||
        (t.position_weight == 0 && t.orientation_weight == 0))
      fail(ErrorCode::invalid_argument, "solve_ik: task needs a nonzero nonnegative weight");
    if (!t.active_joints.empty() && static_cast<int>(t.active_joints.size()) != n)
      fail(ErrorCode::invalid_argument, "solve_ik: task mask length does not match chain");
    if (t.active_joints.empty()) {
      any_active = true;
    } else {
      for (auto f : t.active_joints) any_active = any_active || f;
    }
  }
  if (!any_active) fail(ErrorCode::invalid_argument, "solve_ik: all joints are masked out");

  // priority -> task indices, ascending priority solved first
  std::map<int, std::vector<size_t>> levels;
  for (size_t i = 0; i < tasks.size(); ++i) levels[tasks[i].priority].push_back(i);

  JointState q = clamp_to_limits(chain, seed);
  JointState best_q = q;
  std::vector<double> best_levels(levels.size(), std::numeric_limits<double>::infinity());
  double best_resid = std::numeric_limits<double>::infinity();
  int restarts = 0;
  Rng restart_rng(0x6b2e9c4f01d7a3e5ULL);

  // Attempt-local progress tracking. When an attempt stalls, the lowest
  // surviving priority level is shed first (the higher levels then polish
  // free of nullspace drift); once a single level remains, the attempt is
  // abandoned and the solve re-seeds near the original seed.
  const size_t level_count = levels.size();
  size_t active_levels = level_count;
  std::vector<double> attempt_best(level_count, std::numeric_limits<double>::infinity());
  int attempt_best_iter = 0;

  auto consider = [&](const JointState& cand, const std::vector<TaskError>& cand_errs,
                      int iter) {
    auto lv = level_norms(levels, tasks, cand_errs);
    if (lex_better(lv, best_levels, opts.tolerance)) {
      best_levels = lv;
      best_resid = weighted_norm(tasks, cand_errs);
      best_q = cand;
    }
    if (lex_better(lv, attempt_best, opts.tolerance)) {
      attempt_best = lv;
      attempt_best_iter = iter;
    }
  };

  IkReport report;
  int iter = 0;
  for (; iter <= opts.max_iterations; ++iter) {
    auto errs = task_errors(chain, q, tasks);
    double resid = weighted_norm(tasks, errs);
    consider(q, errs, iter);
    if (resid < opts.tolerance) {
      best_q = q;
      best_resid = resid;
      break;
    }
    if (iter == opts.max_iterations) break;

    if (iter - attempt_best_iter >= opts.stall_window) {
      if (active_levels > 1) {
        --active_levels;
      } else {
        ++restarts;
        for (int j = 0; j < n; ++j) q[j] = seed[j] + restart_rng.uniform(-0.7, 0.7);
        q = clamp_to_limits(chain, q);
        active_levels = level_count;
      }
      attempt_best.assign(level_count, std::numeric_limits<double>::infinity());
      attempt_best_iter = iter;
      continue;
    }

    // Per-joint damping, boosted near limits.
    Eigen::VectorXd damping_sq(n);
    for (int j = 0; j < n; ++j) {
      double lam = opts.damping;
      if (q[j] - chain.joints[j].limit_lo < opts.limit_margin ||
          chain.joints[j].limit_hi - q[j] < opts.limit_margin)
        lam *= opts.limit_damping_boost;
      damping_sq(j) = lam * lam;
    }

    Eigen::VectorXd dq = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
    std::vector<Eigen::VectorXd> level_steps;
    size_t level_no = 0;

    for (const auto& [priority, idxs] : levels) {
      if (level_no++ >= active_levels) break;
      // Stack the weighted rows of every task at this level.
      int rows = 0;
      for (size_t ti : idxs) {
        if (tasks[ti].position_weight > 0) rows += 3;
        if (tasks[ti].orientation_weight > 0) rows += 3;
      }
      Eigen::MatrixXd jac(rows, n);
      Eigen::VectorXd err(rows);
      int r = 0;
      for (size_t ti : idxs) {
        const IkTask& task = tasks[ti];
        const std::vector<uint8_t>* mask = task.active_joints.empty() ? nullptr
                                                                      : &task.active_joints;
        auto jt = numeric_jacobian(chain, q, task.end_effector, mask, opts.fd_step);
        if (task.position_weight > 0) {
          jac.middleRows(r, 3) = task.position_weight * jt.topRows(3);
          err.segment(r, 3) = task.position_weight * errs[ti].position;
          r += 3;
        }
        if (task.orientation_weight > 0) {
          jac.middleRows(r, 3) = task.orientation_weight * jt.bottomRows(3);
          err.segment(r, 3) = task.orientation_weight * errs[ti].orientation;
          r += 3;
        }
      }
      // First-order correction for motion already committed by higher levels.
      Eigen::VectorXd rhs = err - jac * dq;
      Eigen::MatrixXd jp = jac * proj;
      Eigen::MatrixXd normal = jp.transpose() * jp;
      normal.diagonal() += damping_sq;
      Eigen::VectorXd x = normal.ldlt().solve(jp.transpose() * rhs);
      dq += proj * x;
      level_steps.push_back(dq);
      proj = proj * null_projector(jp);
    }

    auto apply_capped = [&](const Eigen::VectorXd& delta) {
      Eigen::VectorXd d = delta;
      double norm = d.norm();
      if (norm > opts.max_step) d *= opts.max_step / norm;
      JointState next = q;
      for (int j = 0; j < n; ++j) next[j] += d(j);
      return clamp_to_limits(chain, next);
    };

    // Visit the prefix states (higher-priority contributions only) so the
    // lexicographic best is not polluted by fresh lower-priority nullspace
    // motion, which disturbs converged levels at second order.
    for (size_t k = 0; k + 1 < level_steps.size(); ++k) {
      JointState cand = apply_capped(level_steps[k]);
      consider(cand, task_errors(chain, cand, tasks), iter);
    }

    q = apply_capped(level_steps.back());
  }

  auto final_errs = task_errors(chain, best_q, tasks);
  report.converged = best_resid < opts.tolerance;
  report.iterations = iter;
  report.restarts = restarts;
  report.residual_norm = best_resid;
  report.task_residuals.resize(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    report.task_residuals[i].position_error = final_errs[i].position.norm();
    report.task_residuals[i].orientation_error = final_errs[i].orientation.norm();
  }
  return {best_q, report};
}

}  // namespace armkit::kin
