#include "core/config.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>

#include "core/error.hpp"
#include "json.hpp"

namespace dsk {

namespace {

Config g_config;
std::once_flag g_env_once;

void apply_json(Config& c, const nlohmann::json& j) {
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  auto inum = [&](const char* key, int& field) {
    if (j.contains(key)) field = j.at(key).get<int>();
  };
  num("dt", c.dt);
  num("gravity", c.gravity);
  num("max_translation", c.max_translation);
  num("max_rotation", c.max_rotation);
  num("workspace_min_xy", c.workspace_min_xy);
  num("workspace_max_xy", c.workspace_max_xy);
  num("workspace_min_z", c.workspace_min_z);
  num("workspace_max_z", c.workspace_max_z);
  num("ee_radius", c.ee_radius);
  num("grasp_window", c.grasp_window);
  num("grasp_sink", c.grasp_sink);
  inum("velocity_window", c.velocity_window);
  num("in_flight_min_speed", c.in_flight_min_speed);
  num("support_min_overlap", c.support_min_overlap);
  num("footprint_grid", c.footprint_grid);
  num("penetration_tol", c.penetration_tol);
  num("topple_deviation", c.topple_deviation);
  num("topple_hit_speed", c.topple_hit_speed);
  num("topple_ee_height_frac", c.topple_ee_height_frac);
  num("topple_ee_speed", c.topple_ee_speed);
  num("rot_error_weight", c.rot_error_weight);
  num("pose_tolerance", c.pose_tolerance);
  num("push_reduce_frac", c.push_reduce_frac);
  num("push_cone_deg", c.push_cone_deg);
  num("rotate_angle_tol_deg", c.rotate_angle_tol_deg);
  num("rotate_pos_tol", c.rotate_pos_tol);
  num("touch_max_move", c.touch_max_move);
  num("touch_push_min_move", c.touch_push_min_move);
  num("inside_min_overlap", c.inside_min_overlap);
  num("container_rim_clearance", c.container_rim_clearance);
  num("pick_min_clearance", c.pick_min_clearance);
  num("shaping_floor_tols", c.shaping_floor_tols);
  num("scale_k_tilt", c.scale_k_tilt);
  num("scale_arm_length", c.scale_arm_length);
  num("scale_max_tilt", c.scale_max_tilt);
  num("balance_tilt_tol", c.balance_tilt_tol);
  num("rrt_step", c.rrt_step);
  num("rrt_goal_bias", c.rrt_goal_bias);
  inum("rrt_node_budget", c.rrt_node_budget);
  inum("smooth_attempts", c.smooth_attempts);
  num("path_resolution", c.path_resolution);
  num("collision_check_res", c.collision_check_res);
  num("planner_margin", c.planner_margin);
  num("replan_deviation", c.replan_deviation);
  num("throw_angle_deg", c.throw_angle_deg);
  inum("throw_run_steps", c.throw_run_steps);
  num("throw_max_speed", c.throw_max_speed);
  inum("episode_timeout", c.episode_timeout);
  inum("max_evictions", c.max_evictions);
  num("spawn_min_xy", c.spawn_min_xy);
  num("spawn_max_xy", c.spawn_max_xy);
  num("grid_spacing", c.grid_spacing);
  inum("sampler_max_retries", c.sampler_max_retries);
  inum("base_cam_res", c.base_cam_res);
  num("base_cam_window", c.base_cam_window);
  inum("hand_cam_res", c.hand_cam_res);
  num("hand_cam_window", c.hand_cam_window);
  inum("protocol_timeout_ms", c.protocol_timeout_ms);
  inum("eval_default_seeds", c.eval_default_seeds);
}

}  // namespace

void load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::io, "bad config file " + path + ": " + e.what());
  }
  apply_json(g_config, j);
}

const Config& config() {
  std::call_once(g_env_once, [] {
    if (const char* p = std::getenv("DESKSKILLS_CONFIG")) load_config_file(p);
  });
  return g_config;
}

}  // namespace dsk
