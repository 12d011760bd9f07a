#include "core/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/config.hpp"
#include "core/error.hpp"

namespace dsk {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

Predicate base(PredKind k) {
  Predicate p;
  p.kind = k;
  return p;
}

// Shaped progress toward a tolerance: 1 exactly within tolerance, otherwise a
// distance ramp against the baseline (floored so restore-style goals whose
// baseline starts at zero still produce a gradient).
double shaped(double d, double d0, double tol) {
  if (d <= tol) return 1.0;
  double floor = config().shaping_floor_tols * std::max(tol, 1e-6);
  double denom = std::max(d0, floor);
  return std::clamp(1.0 - d / denom, 0.0, 1.0 - 1e-9);
}

const WorldObject& need_obj(const WorldState& s, const std::string& id) { return s.obj(id); }

bool obj_attached(const WorldState& s, const std::string& id) { return s.ee.attached == id; }

bool resting_on_any(const WorldState& s, const std::string& id,
                    const std::vector<std::string>& bases, int* base_idx = nullptr) {
  int i = s.find(id);
  if (i < 0) fail(Errc::not_found, "predicate references missing object: " + id);
  int sup = s.supporter.empty() ? kSupportNone : s.supporter[i];
  if (sup < 0) return false;
  for (const auto& b : bases) {
    if (s.objects[sup].id == b) {
      if (base_idx) *base_idx = sup;
      return true;
    }
  }
  return false;
}

// Target point for placing `obj` on the nearest acceptable base.
Vec3 place_spot(const WorldState& s, const Predicate& p) {
  const WorldObject& o = need_obj(s, p.objects.at(0));
  double best = 1e18;
  Vec3 spot = o.pose.position;
  for (const auto& bid : p.bases) {
    const WorldObject& b = need_obj(s, bid);
    Vec3 t = b.pose.position;
    t.z = b.top_z() + world_half_height(o.shape, o.pose.orientation);
    double d = distance(o.pose.position, t);
    if (d < best) {
      best = d;
      spot = t;
    }
  }
  return spot;
}

void track_events(Predicate& p, const WorldState& next) {
  if (p.objects.empty()) return;
  const std::string& id = p.objects[0];
  for (const auto& e : next.events) {
    if (e.type == Event::Type::contact && e.a == "ee" && e.b == id) p.ever_contacted = true;
    if (e.type == Event::Type::grasp && e.b == id) p.ever_grasped = true;
  }
  int i = next.find(id);
  if (i >= 0)
    p.max_disp = std::max(p.max_disp, distance(next.objects[i].pose.position, p.baseline_pos));
}

struct LeafOutcome {
  double reward = 0;
  bool success = false;
  bool failure = false;
};

LeafOutcome eval_leaf(Predicate& p, const WorldState& prev, const WorldState& next) {
  (void)prev;
  const Config& cfg = config();
  LeafOutcome out;
  switch (p.kind) {
    case PredKind::ee_at_pos: {
      double d = distance(next.ee.pose.position, p.target_pos);
      out.success = d <= p.tolerance;
      out.reward = shaped(d, p.baseline_dist, p.tolerance);
      break;
    }
    case PredKind::ee_at_pose: {
      double e = pose_error(next.ee.pose, p.target_pose).combined;
      out.success = e <= p.tolerance;
      out.reward = shaped(e, p.baseline_dist, p.tolerance);
      break;
    }
    case PredKind::at_pos: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      if (p.forbid_grasp && p.ever_grasped) { out.failure = true; break; }
      double d = distance(o.pose.position, p.target_pos);
      out.success = d <= p.tolerance && !obj_attached(next, o.id) && !o.in_flight;
      out.reward = shaped(d, p.baseline_dist, p.tolerance);
      break;
    }
    case PredKind::at_pose: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      double e = pose_error(o.pose, p.target_pose).combined;
      out.success = e <= p.tolerance && !obj_attached(next, o.id);
      out.reward = shaped(e, p.baseline_dist, p.tolerance);
      break;
    }
    case PredKind::on_top: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      int oi = next.find(o.id);
      bool placed = resting_on_any(next, o.id, p.bases);
      out.success = placed && !obj_attached(next, o.id) && !ee_touching(next, oi);
      double d = distance(o.pose.position, place_spot(next, p));
      out.reward = out.success ? 1.0 : shaped(d, p.baseline_dist, 0.01);
      break;
    }
    case PredKind::inside: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      int base_idx = -1;
      bool on = resting_on_any(next, o.id, p.bases, &base_idx);
      bool ok = false;
      if (on && !obj_attached(next, o.id)) {
        const WorldObject& c = next.objects[base_idx];
        double overlap = footprint_overlap(o.shape, o.pose, c.shape, c.pose);
        double rim = c.top_z() + cfg.container_rim_clearance;
        ok = overlap >= cfg.inside_min_overlap && o.top_z() <= rim;
      }
      out.success = ok;
      double d = distance(o.pose.position, place_spot(next, p));
      out.reward = ok ? 1.0 : shaped(d, p.baseline_dist, 0.01);
      break;
    }
    case PredKind::touch:
    case PredKind::touched_gently:
    case PredKind::touch_pushed: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      TouchMode mode = p.kind == PredKind::touched_gently ? TouchMode::gentle
                       : p.kind == PredKind::touch_pushed ? TouchMode::push
                                                          : p.touch_mode;
      double cur_disp = distance(o.pose.position, p.baseline_pos);
      double reach = distance(next.ee.pose.position, o.pose.position);
      double reach_tol = o.shape.bounding_radius() + cfg.ee_radius + 0.005;
      if (p.ever_grasped) { out.failure = true; break; }
      switch (mode) {
        case TouchMode::gentle:
          if (p.max_disp > p.max_move) { out.failure = true; break; }
          out.success = p.ever_contacted && p.max_disp <= p.max_move;
          out.reward = out.success ? 1.0 : shaped(reach, p.baseline_dist, reach_tol);
          break;
        case TouchMode::push:
          if (p.forbid_topple && o.toppled) { out.failure = true; break; }
          out.success = cur_disp >= p.min_move;
          out.reward = out.success ? 1.0 : std::clamp(cur_disp / p.min_move, 0.0, 1.0 - 1e-9);
          break;
        case TouchMode::topple:
          out.success = p.ever_contacted && o.toppled;
          out.reward = out.success ? 1.0 : shaped(reach, p.baseline_dist, reach_tol);
          break;
      }
      break;
    }
    case PredKind::hit: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      for (const auto& e : next.events) {
        if (e.type != Event::Type::hit || e.a != o.id) continue;
        for (const auto& t : p.bases) {
          if (e.b != t) continue;
          bool toppled_now =
              next.obj(t).toppled || next.has_event(Event::Type::toppled, t);
          if (!p.require_topple || toppled_now) out.success = true;
        }
      }
      Vec3 tgt = need_obj(next, p.bases.at(0)).pose.position;
      out.reward = out.success ? 1.0 : shaped(distance(o.pose.position, tgt), p.baseline_dist, 0.02);
      break;
    }
    case PredKind::topple_structure: {
      int on_ground = 0;
      for (const auto& id : p.objects) {
        int i = next.find(id);
        if (i < 0) fail(Errc::not_found, "predicate references missing object: " + id);
        if (!next.objects[i].in_flight && !obj_attached(next, id) &&
            next.supporter[i] == kSupportTable)
          ++on_ground;
      }
      out.success = on_ground == int(p.objects.size());
      out.reward = p.objects.empty() ? 1.0 : double(on_ground) / double(p.objects.size());
      if (!out.success) out.reward = std::min(out.reward, 1.0 - 1e-9);
      break;
    }
    case PredKind::push_progress: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      if (p.ever_grasped) { out.failure = true; break; }
      const WorldObject& goal = need_obj(next, p.bases.at(0));
      double d = distance_xy(o.pose.position, goal.pose.position);
      double reduction = p.baseline_dist > 1e-9 ? (p.baseline_dist - d) / p.baseline_dist : 0.0;
      Vec3 disp = (o.pose.position - p.baseline_pos).horizontal();
      bool cone_ok = false;
      if (disp.norm() > 1e-6) {
        double cosang = disp.normalized().dot(p.baseline_dir);
        cone_ok = cosang >= std::cos(p.cone_deg * kDeg);
      }
      out.success = reduction >= p.reduce_frac && cone_ok;
      out.reward =
          out.success ? 1.0 : std::clamp(reduction / p.reduce_frac, 0.0, 1.0 - 1e-9);
      break;
    }
    case PredKind::rotated_by: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      double net = wrap_angle(yaw_of(o.pose.orientation) - p.baseline_yaw);
      double target = p.restore ? 0.0 : p.angle_deg * kDeg * p.direction;
      double err = std::abs(wrap_angle(net - target));
      bool pos_ok =
          !p.check_position || distance(o.pose.position, p.baseline_pos) <= p.pos_tol;
      out.success = err <= p.angle_tol_deg * kDeg && pos_ok && !obj_attached(next, o.id);
      double denom = std::max(p.angle_deg * kDeg, 1e-6);
      out.reward = out.success ? 1.0 : std::clamp(1.0 - err / denom, 0.0, 1.0 - 1e-9);
      break;
    }
    case PredKind::balanced: {
      if (!next.scale) { out.reward = 0; break; }
      double t = std::abs(next.scale->tilt);
      out.success = t <= p.tolerance;
      out.reward =
          out.success ? 1.0 : std::clamp(1.0 - t / config().scale_max_tilt, 0.0, 1.0 - 1e-9);
      break;
    }
    case PredKind::trace_goals: {
      int done_count = 0;
      const TraceGoal* active = nullptr;
      for (const auto& g : next.goals) {
        if (g.status == TraceGoal::Status::done) ++done_count;
        if (g.status == TraceGoal::Status::active && !active) active = &g;
      }
      int n = int(next.goals.size());
      out.success = n > 0 && done_count == n;
      double progress = 0;
      if (active)
        progress = std::clamp(1.0 - distance(next.ee.pose.position, active->position) / 0.5,
                              0.0, 1.0);
      out.reward = n == 0 ? 0.0 : (done_count + progress) / double(n);
      if (!out.success) out.reward = std::min(out.reward, 1.0 - 1e-9);
      break;
    }
    case PredKind::not_touching: {
      for (const auto& e : next.events) {
        if (e.type != Event::Type::contact) continue;
        for (const auto& id : p.objects)
          if (e.a == id || e.b == id) out.failure = true;
      }
      out.reward = out.failure ? 0.0 : 1.0;
      break;
    }
    case PredKind::picked: {
      const WorldObject& o = need_obj(next, p.objects[0]);
      bool held = obj_attached(next, o.id);
      double clearance = config().pick_min_clearance;
      out.success = held && o.bottom_z() >= clearance;
      if (held) {
        out.reward = 0.5 + 0.5 * std::clamp(o.bottom_z() / clearance, 0.0, 1.0);
        if (!out.success) out.reward = std::min(out.reward, 1.0 - 1e-9);
      } else {
        Vec3 top = o.pose.position;
        top.z = o.top_z();
        double reach = distance(next.ee.pose.position, top);
        out.reward = 0.5 * shaped(reach, p.baseline_dist, 0.005);
      }
      break;
    }
    default:
      fail(Errc::internal, "eval_leaf on logical node");
  }
  return out;
}

struct NodeResult {
  double reward = 0;
  bool done = false;
  bool failed = false;
};

NodeResult eval_node(Predicate& p, const WorldState& prev, const WorldState& next, bool active) {
  if (p.status == PredStatus::pending && active) p.status = PredStatus::active;

  if (p.children.empty() && p.kind != PredKind::set_all) {
    // leaf: trackers run until the node is done, so pending constraints
    // (e.g. "never grasped" on a later sequence child) still see history
    if (!p.done()) track_events(p, next);
    if (p.done()) return {1.0, true, false};
    if (p.failed()) return {0.0, false, true};
    LeafOutcome out = eval_leaf(p, prev, next);
    if (out.failure) {
      p.status = PredStatus::failed;
      return {0.0, false, true};
    }
    if (out.success && p.status == PredStatus::active) {
      p.status = PredStatus::done;
      p.first_done_step = next.step_count;
      return {1.0, true, false};
    }
    return {std::clamp(out.reward, 0.0, 1.0), false, false};
  }

  // logical nodes
  bool prior_done = p.done();
  NodeResult res;
  switch (p.kind) {
    case PredKind::set_all: {
      double sum = 0;
      bool all_done = true, any_failed = false;
      for (auto& ch : p.children) {
        NodeResult r = eval_node(ch, prev, next, active);
        sum += r.reward;
        any_failed |= r.failed;
        if (!is_constraint(ch) && !r.done) all_done = false;
      }
      res.reward = p.children.empty() ? 1.0 : sum / double(p.children.size());
      res.done = all_done && !any_failed;
      res.failed = any_failed;
      break;
    }
    case PredKind::sequence: {
      int n = int(p.children.size());
      int active_idx = 0;
      while (active_idx < n && p.children[active_idx].done()) ++active_idx;
      double done_count = active_idx;
      double active_reward = 0;
      bool any_failed = false;
      for (int i = 0; i < n; ++i) {
        NodeResult r = eval_node(p.children[i], prev, next, active && i == active_idx);
        any_failed |= r.failed;
        if (i == active_idx) {
          if (r.done) ++done_count;  // completed this step
          else active_reward = r.reward;
        }
      }
      bool all_done = true;
      for (auto& ch : p.children)
        if (!ch.done()) all_done = false;
      res.reward = n == 0 ? 1.0 : std::min((done_count + active_reward) / n, 1.0);
      if (all_done) res.reward = 1.0;
      res.done = all_done && !any_failed;
      res.failed = any_failed;
      break;
    }
    case PredKind::once: {
      NodeResult r = eval_node(p.children.at(0), prev, next, active);
      res = r;
      break;
    }
    default:
      fail(Errc::internal, "logical node expected");
  }

  if (res.failed && !prior_done) {
    p.status = PredStatus::failed;
    return {0.0, false, true};
  }
  if (p.failed()) return {0.0, false, true};
  if (prior_done) return {1.0, true, false};
  if (res.done && p.status == PredStatus::active) {
    p.status = PredStatus::done;
    p.first_done_step = next.step_count;
    return {1.0, true, false};
  }
  return {std::clamp(res.reward, 0.0, 1.0), false, false};
}

void capture_node(Predicate& p, const WorldState& s) {
  switch (p.kind) {
    case PredKind::ee_at_pos:
      p.baseline_dist = distance(s.ee.pose.position, p.target_pos);
      break;
    case PredKind::ee_at_pose:
      p.baseline_dist = pose_error(s.ee.pose, p.target_pose).combined;
      break;
    case PredKind::at_pos: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      p.baseline_pos = o.pose.position;
      p.baseline_dist = distance(o.pose.position, p.target_pos);
      break;
    }
    case PredKind::at_pose: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      p.baseline_pos = o.pose.position;
      p.baseline_dist = pose_error(o.pose, p.target_pose).combined;
      break;
    }
    case PredKind::on_top:
    case PredKind::inside: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      p.baseline_pos = o.pose.position;
      p.baseline_dist = distance(o.pose.position, place_spot(s, p));
      break;
    }
    case PredKind::touch:
    case PredKind::touched_gently:
    case PredKind::touch_pushed: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      p.baseline_pos = o.pose.position;
      p.baseline_dist = distance(s.ee.pose.position, o.pose.position);
      break;
    }
    case PredKind::hit: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      p.baseline_pos = o.pose.position;
      p.baseline_dist = distance(o.pose.position, need_obj(s, p.bases.at(0)).pose.position);
      break;
    }
    case PredKind::push_progress: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      const WorldObject& g = need_obj(s, p.bases.at(0));
      p.baseline_pos = o.pose.position;
      p.baseline_dist = distance_xy(o.pose.position, g.pose.position);
      p.baseline_dir = (g.pose.position - o.pose.position).horizontal().normalized();
      break;
    }
    case PredKind::rotated_by: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      p.baseline_pos = o.pose.position;
      p.baseline_yaw = yaw_of(o.pose.orientation);
      break;
    }
    case PredKind::picked: {
      const WorldObject& o = need_obj(s, p.objects[0]);
      Vec3 top = o.pose.position;
      top.z = o.top_z();
      p.baseline_pos = o.pose.position;
      p.baseline_dist = distance(s.ee.pose.position, top);
      break;
    }
    default:
      break;
  }
  for (auto& ch : p.children) capture_node(ch, s);
}

void report_walk(const Predicate& p, std::vector<int>& path, int depth,
                 std::vector<NodeReport>& out) {
  out.push_back({&p, path, depth});
  for (int i = 0; i < int(p.children.size()); ++i) {
    path.push_back(i);
    report_walk(p.children[i], path, depth + 1, out);
    path.pop_back();
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

}  // namespace

Predicate pred_ee_at_pos(const Vec3& target, double tol) {
  Predicate p = base(PredKind::ee_at_pos);
  p.target_pos = target;
  p.tolerance = tol;
  return p;
}

Predicate pred_ee_at_pose(const Pose& target, double tol) {
  Predicate p = base(PredKind::ee_at_pose);
  p.target_pose = target;
  p.tolerance = tol;
  return p;
}

Predicate pred_at_pos(const std::string& obj, const Vec3& target, double tol, bool forbid_grasp) {
  Predicate p = base(PredKind::at_pos);
  p.objects = {obj};
  p.target_pos = target;
  p.tolerance = tol;
  p.forbid_grasp = forbid_grasp;
  return p;
}

Predicate pred_at_pose(const std::string& obj, const Pose& target, double tol) {
  Predicate p = base(PredKind::at_pose);
  p.objects = {obj};
  p.target_pose = target;
  p.tolerance = tol;
  return p;
}

Predicate pred_on_top(const std::string& obj, const std::vector<std::string>& bases) {
  Predicate p = base(PredKind::on_top);
  p.objects = {obj};
  p.bases = bases;
  return p;
}

Predicate pred_inside(const std::string& obj, const std::vector<std::string>& containers) {
  Predicate p = base(PredKind::inside);
  p.objects = {obj};
  p.bases = containers;
  return p;
}

Predicate pred_touch(const std::string& obj, TouchMode mode) {
  Predicate p = base(PredKind::touch);
  p.objects = {obj};
  p.touch_mode = mode;
  p.max_move = config().touch_max_move;
  p.min_move = config().touch_push_min_move;
  if (mode == TouchMode::push) p.forbid_topple = true;
  return p;
}

Predicate pred_hit(const std::string& thrown, const std::string& target, bool require_topple) {
  Predicate p = base(PredKind::hit);
  p.objects = {thrown};
  p.bases = {target};
  p.require_topple = require_topple;
  return p;
}

Predicate pred_topple_structure(const std::vector<std::string>& objs) {
  Predicate p = base(PredKind::topple_structure);
  p.objects = objs;
  return p;
}

Predicate pred_push_progress(const std::string& obj, const std::string& goal_obj) {
  Predicate p = base(PredKind::push_progress);
  p.objects = {obj};
  p.bases = {goal_obj};
  p.reduce_frac = config().push_reduce_frac;
  p.cone_deg = config().push_cone_deg;
  p.forbid_grasp = true;
  return p;
}

Predicate pred_rotated_by(const std::string& obj, double angle_deg, int direction,
                          bool check_position, bool restore) {
  static const double kMenu[] = {30, 60, 90, 120, 150};
  bool ok = false;
  for (double a : kMenu) ok |= std::abs(angle_deg - a) < 1e-9;
  if (!ok) fail(Errc::invalid_arg, "rotation angle must be one of 30/60/90/120/150");
  if (direction != 1 && direction != -1) fail(Errc::invalid_arg, "direction must be +-1");
  Predicate p = base(PredKind::rotated_by);
  p.objects = {obj};
  p.angle_deg = angle_deg;
  p.direction = direction;
  p.angle_tol_deg = config().rotate_angle_tol_deg;
  p.pos_tol = config().rotate_pos_tol;
  p.check_position = check_position;
  p.restore = restore;
  return p;
}

Predicate pred_touched_gently(const std::string& obj) {
  Predicate p = base(PredKind::touched_gently);
  p.objects = {obj};
  p.max_move = config().touch_max_move;
  return p;
}

Predicate pred_touch_pushed(const std::string& obj) {
  Predicate p = base(PredKind::touch_pushed);
  p.objects = {obj};
  p.min_move = config().touch_push_min_move;
  p.forbid_topple = true;
  return p;
}

Predicate pred_balanced() {
  Predicate p = base(PredKind::balanced);
  p.tolerance = config().balance_tilt_tol;
  return p;
}

Predicate pred_trace_goals() { return base(PredKind::trace_goals); }

Predicate pred_not_touching(const std::vector<std::string>& obstacles) {
  Predicate p = base(PredKind::not_touching);
  p.objects = obstacles;
  return p;
}

Predicate pred_picked(const std::string& obj) {
  Predicate p = base(PredKind::picked);
  p.objects = {obj};
  return p;
}

Predicate pred_set(std::vector<Predicate> children) {
  Predicate p = base(PredKind::set_all);
  p.children = std::move(children);
  return p;
}

Predicate pred_sequence(std::vector<Predicate> children) {
  Predicate p = base(PredKind::sequence);
  p.children = std::move(children);
  return p;
}

Predicate pred_once(Predicate child) {
  Predicate p = base(PredKind::once);
  p.children.push_back(std::move(child));
  return p;
}

void capture_baselines(Predicate& root, const WorldState& s0) { capture_node(root, s0); }

EvalResult evaluate(Predicate& root, const WorldState& prev, const WorldState& next) {
  NodeResult r = eval_node(root, prev, next, true);
  return {r.done ? 1.0 : r.reward, root.done()};
}

bool is_constraint(const Predicate& p) { return p.kind == PredKind::not_touching; }

bool tree_failed(const Predicate& root) {
  if (root.failed()) return true;
  for (const auto& ch : root.children)
    if (tree_failed(ch)) return true;
  return false;
}

std::vector<NodeReport> tree_report(const Predicate& root) {
  std::vector<NodeReport> out;
  std::vector<int> path;
  report_walk(root, path, 0, out);
  return out;
}

Predicate* node_at(Predicate& root, const std::vector<int>& path) {
  Predicate* p = &root;
  for (int i : path) {
    if (i < 0 || i >= int(p->children.size())) return nullptr;
    p = &p->children[i];
  }
  return p;
}

Vec3 predicate_focus(const Predicate& p, const WorldState& s) {
  switch (p.kind) {
    case PredKind::ee_at_pos:
      return p.target_pos;
    case PredKind::ee_at_pose:
      return p.target_pose.position;
    case PredKind::trace_goals:
      for (const auto& g : s.goals)
        if (g.status == TraceGoal::Status::active) return g.position;
      return s.ee.pose.position;
    case PredKind::balanced:
      if (s.scale) return s.scale->pivot;
      return s.ee.pose.position;
    case PredKind::topple_structure: {
      double best = 1e18;
      Vec3 out = s.ee.pose.position;
      for (const auto& id : p.objects) {
        int i = s.find(id);
        if (i < 0) continue;
        double d = distance(s.ee.pose.position, s.objects[i].pose.position);
        if (d < best) {
          best = d;
          out = s.objects[i].pose.position;
        }
      }
      return out;
    }
    default:
      if (!p.objects.empty()) {
        int i = s.find(p.objects[0]);
        if (i >= 0) return s.objects[i].pose.position;
      }
      return s.ee.pose.position;
  }
}

std::string to_text(const Predicate& p) {
  std::string out;
  switch (p.kind) {
    case PredKind::ee_at_pos:
      out = "EEAtPos(target=[" + fmt(p.target_pos.x) + "," + fmt(p.target_pos.y) + "," +
            fmt(p.target_pos.z) + "],tol=" + fmt(p.tolerance) + ")";
      break;
    case PredKind::ee_at_pose:
      out = "EEAtPose(tol=" + fmt(p.tolerance) + ")";
      break;
    case PredKind::at_pos:
      out = "AtPos(obj=" + p.objects[0] + ",tol=" + fmt(p.tolerance) +
            (p.forbid_grasp ? ",no_grasp" : "") + ")";
      break;
    case PredKind::at_pose:
      out = "AtPose(obj=" + p.objects[0] + ",tol=" + fmt(p.tolerance) + ")";
      break;
    case PredKind::on_top:
      out = "OnTop(obj=" + p.objects[0] + ",bases=[" + join(p.bases) + "])";
      break;
    case PredKind::inside:
      out = "Inside(obj=" + p.objects[0] + ",containers=[" + join(p.bases) + "])";
      break;
    case PredKind::touch:
      out = std::string("Touch(obj=") + p.objects[0] + ",mode=" +
            (p.touch_mode == TouchMode::gentle ? "gentle"
             : p.touch_mode == TouchMode::push ? "push"
                                               : "topple") +
            ")";
      break;
    case PredKind::hit:
      out = "Hit(obj=" + p.objects[0] + ",target=" + p.bases[0] +
            (p.require_topple ? ",topple" : "") + ")";
      break;
    case PredKind::topple_structure:
      out = "ToppleStructure(objs=[" + join(p.objects) + "])";
      break;
    case PredKind::push_progress:
      out = "PushProgress(obj=" + p.objects[0] + ",goal=" + p.bases[0] +
            ",reduce=" + fmt(p.reduce_frac) + ",cone=" + fmt(p.cone_deg) + ")";
      break;
    case PredKind::rotated_by:
      out = "RotatedBy(obj=" + p.objects[0] + ",angle=" + fmt(p.angle_deg) +
            ",dir=" + (p.direction > 0 ? "acw" : "cw") + (p.restore ? ",restore" : "") + ")";
      break;
    case PredKind::touched_gently:
      out = "TouchedGently(obj=" + p.objects[0] + ",max_move=" + fmt(p.max_move) + ")";
      break;
    case PredKind::touch_pushed:
      out = "TouchPushed(obj=" + p.objects[0] + ",min_move=" + fmt(p.min_move) + ")";
      break;
    case PredKind::balanced:
      out = "Balanced(tol=" + fmt(p.tolerance) + ")";
      break;
    case PredKind::trace_goals:
      out = "TraceGoals()";
      break;
    case PredKind::not_touching:
      out = "NotTouching(obstacles=[" + join(p.objects) + "])";
      break;
    case PredKind::picked:
      out = "Picked(obj=" + p.objects[0] + ")";
      break;
    case PredKind::set_all:
    case PredKind::sequence:
    case PredKind::once: {
      out = p.kind == PredKind::set_all ? "Set(" : p.kind == PredKind::sequence ? "Sequence(" : "Once(";
      for (size_t i = 0; i < p.children.size(); ++i) {
        if (i) out += ",";
        out += to_text(p.children[i]);
      }
      out += ")";
      break;
    }
  }
  return out;
}

}  // namespace dsk
