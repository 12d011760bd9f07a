#pragma once

#include <string>
#include <vector>

#include "core/world.hpp"

namespace dsk {

enum class PredKind {
  // physical
  ee_at_pos,
  ee_at_pose,
  at_pos,
  at_pose,
  on_top,
  inside,
  touch,
  hit,
  topple_structure,
  // task criteria
  push_progress,
  rotated_by,
  touched_gently,
  touch_pushed,
  balanced,
  trace_goals,
  not_touching,
  picked,
  // logical
  set_all,
  sequence,
  once,
};

enum class PredStatus { pending, active, done, failed };

enum class TouchMode { gentle, push, topple };

// One node of a task's predicate tree. A single struct carries the union of
// all parameters; which fields matter depends on `kind`. Runtime status and
// baselines live inline so a tree is a plain copyable value.
struct Predicate {
  PredKind kind = PredKind::set_all;
  std::vector<std::string> objects;  // manipulated object(s) or obstacle list
  std::vector<std::string> bases;    // acceptable bases/containers/hit targets
  Vec3 target_pos;
  Pose target_pose;
  double tolerance = 0.05;

  double angle_deg = 0;  // rotated_by; must be one of 30/60/90/120/150
  int direction = 1;     // +1 anti-clockwise (positive yaw), -1 clockwise
  double angle_tol_deg = 5;
  double pos_tol = 0.05;
  bool check_position = true;
  bool restore = false;  // rotated_by: require net rotation back to zero

  double reduce_frac = 0.30;
  double cone_deg = 45;
  double max_move = 0.03;
  double min_move = 0.10;
  bool require_topple = false;
  bool forbid_grasp = false;
  bool forbid_topple = false;
  TouchMode touch_mode = TouchMode::gentle;

  std::vector<Predicate> children;

  // runtime
  PredStatus status = PredStatus::pending;
  int64_t first_done_step = -1;

  // baselines, captured at reset
  double baseline_dist = 0;
  Vec3 baseline_pos;
  double baseline_yaw = 0;
  Vec3 baseline_dir;

  // event trackers
  bool ever_contacted = false;
  bool ever_grasped = false;
  double max_disp = 0;

  bool done() const { return status == PredStatus::done; }
  bool failed() const { return status == PredStatus::failed; }
};

// Constructors. Construction validates parameters (e.g. the rotation-angle
// menu) and throws Errc::invalid_arg on violations.
Predicate pred_ee_at_pos(const Vec3& target, double tol);
Predicate pred_ee_at_pose(const Pose& target, double tol);
Predicate pred_at_pos(const std::string& obj, const Vec3& target, double tol,
                      bool forbid_grasp = false);
Predicate pred_at_pose(const std::string& obj, const Pose& target, double tol);
Predicate pred_on_top(const std::string& obj, const std::vector<std::string>& bases);
Predicate pred_inside(const std::string& obj, const std::vector<std::string>& containers);
Predicate pred_touch(const std::string& obj, TouchMode mode);
Predicate pred_hit(const std::string& thrown, const std::string& target, bool require_topple);
Predicate pred_topple_structure(const std::vector<std::string>& objs);
Predicate pred_push_progress(const std::string& obj, const std::string& goal_obj);
Predicate pred_rotated_by(const std::string& obj, double angle_deg, int direction,
                          bool check_position = true, bool restore = false);
Predicate pred_touched_gently(const std::string& obj);
Predicate pred_touch_pushed(const std::string& obj);
Predicate pred_balanced();
Predicate pred_trace_goals();
Predicate pred_not_touching(const std::vector<std::string>& obstacles);
Predicate pred_picked(const std::string& obj);
Predicate pred_set(std::vector<Predicate> children);
Predicate pred_sequence(std::vector<Predicate> children);
Predicate pred_once(Predicate child);

// Records initial poses/distances used by shaping and the relative criteria.
void capture_baselines(Predicate& root, const WorldState& s0);

struct EvalResult {
  double reward = 0;
  bool success = false;
};

// Advances the tree one step and returns the root's dense reward in [0, 1]
// plus its latched success. Statuses and trackers update in place.
EvalResult evaluate(Predicate& root, const WorldState& prev, const WorldState& next);

// Constraint nodes (not_touching) gate failure but are never "done".
bool is_constraint(const Predicate& p);

bool tree_failed(const Predicate& root);

struct NodeReport {
  const Predicate* node;
  std::vector<int> path;
  int depth;
};
std::vector<NodeReport> tree_report(const Predicate& root);
Predicate* node_at(Predicate& root, const std::vector<int>& path);

// Where the EE should head for this node (greedy scheduling, shaping).
Vec3 predicate_focus(const Predicate& p, const WorldState& s);

// Canonical, run-stable text form embedded in episode metadata.
std::string to_text(const Predicate& root);

}  // namespace dsk
