#pragma once

#include <string>

namespace dsk {

// Engine-wide constants. Defaults are the contract; a JSON file named by the
// DESKSKILLS_CONFIG environment variable can override individual fields.
struct Config {
  // stepping
  double dt = 0.02;                  // seconds per control step
  double gravity = 9.81;             // m/s^2
  double max_translation = 0.05;     // per-axis action clamp, meters
  double max_rotation = 0.2;         // per-axis action clamp, radians
  double workspace_min_xy = -0.6;    // end-effector bounds, meters
  double workspace_max_xy = 0.6;
  double workspace_min_z = 0.0;
  double workspace_max_z = 0.8;

  // grasping / contact
  double ee_radius = 0.02;           // contact sphere around the tip
  double grasp_window = 0.02;        // max gap between tip and object top face
  double grasp_sink = 0.01;          // tolerated tip overlap with the top face
  int velocity_window = 5;           // poses kept for velocity estimation
  double in_flight_min_speed = 0.25; // slower releases settle instead of flying

  // support / settling
  double support_min_overlap = 0.25; // footprint fraction needed to rest on an object
  double footprint_grid = 0.001;     // overlap sampling resolution, meters
  double penetration_tol = 1e-4;     // resting interpenetration bound

  // toppling
  double topple_deviation = 0.7853981633974483;  // 45 deg, radians
  double topple_hit_speed = 1.0;     // projectile relative speed threshold
  double topple_ee_height_frac = 2.0 / 3.0;
  double topple_ee_speed = 0.15;

  // pose metric
  double rot_error_weight = 0.1;     // combined = pos_err + weight * rot_err
  double pose_tolerance = 0.05;      // default combined-error tolerance

  // predicates
  double push_reduce_frac = 0.30;
  double push_cone_deg = 45.0;
  double rotate_angle_tol_deg = 5.0;
  double rotate_pos_tol = 0.05;
  double touch_max_move = 0.03;
  double touch_push_min_move = 0.10;
  double inside_min_overlap = 0.9;
  double container_rim_clearance = 0.10;
  double pick_min_clearance = 0.02;  // lifted object's gap to its old support
  double shaping_floor_tols = 4.0;   // d0 floor as a multiple of the tolerance

  // balance scale
  double scale_k_tilt = 0.5;         // rad per (kg * m)
  double scale_arm_length = 0.2;
  double scale_max_tilt = 0.3;
  double balance_tilt_tol = 0.01;

  // planner
  double rrt_step = 0.04;
  double rrt_goal_bias = 0.1;
  int rrt_node_budget = 20000;
  int smooth_attempts = 100;
  double path_resolution = 0.02;     // max inter-waypoint translation
  double collision_check_res = 0.005;
  double planner_margin = 0.015;     // obstacle inflation beyond the moving shape

  // solvers
  double replan_deviation = 0.05;
  double throw_angle_deg = 45.0;
  int throw_run_steps = 5;
  double throw_max_speed = 2.4;
  int episode_timeout = 2000;
  int max_evictions = 8;

  // scene sampling
  double spawn_min_xy = -0.45;
  double spawn_max_xy = 0.45;
  double grid_spacing = 0.15;        // neighbour-task layout
  int sampler_max_retries = 1000;

  // cameras
  int base_cam_res = 256;
  double base_cam_window = 1.8;      // meters, square
  int hand_cam_res = 128;
  double hand_cam_window = 0.3;

  // harness
  int protocol_timeout_ms = 20000;
  int eval_default_seeds = 20;
};

// Process-wide configuration; override file (if any) is applied on first use.
const Config& config();

// Applies overrides from a JSON file. Throws dsk::Error on parse problems.
void load_config_file(const std::string& path);

}  // namespace dsk
