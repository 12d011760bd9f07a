#include "core/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "core/config.hpp"
#include "core/error.hpp"

namespace dsk {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

double keep_grip(const WorldState& s) { return s.ee.attached.empty() ? -1.0 : 1.0; }

double xy_extent(const Shape& s) {
  switch (s.kind) {
    case ShapeKind::box: return std::hypot(s.hx, s.hy);
    case ShapeKind::disc: return s.r;
    case ShapeKind::sphere: return s.r;
  }
  return 0;
}

// farthest reach of the footprint from the object center along `dir`
double extent_along(const WorldObject& o, const Vec3& dir) {
  Footprint fp = footprint_of(o.shape, o.pose);
  if (fp.is_circle) return fp.radius;
  double best = 0;
  for (const auto& v : fp.poly) {
    double d = (v.x - o.pose.position.x) * dir.x + (v.y - o.pose.position.y) * dir.y;
    best = std::max(best, d);
  }
  return best;
}

Shape carry_shape(const WorldState& s) {
  const Config& cfg = config();
  double r = cfg.ee_radius;
  if (!s.ee.attached.empty()) {
    int i = s.find(s.ee.attached);
    if (i >= 0)
      r = std::max(r, s.ee.grasp_offset.position.norm() +
                          s.objects[i].shape.bounding_radius());
  }
  return Shape::sphere(r + cfg.planner_margin);
}

std::vector<Obstacle> world_obstacles(const WorldState& s,
                                      const std::vector<std::string>& exclude) {
  std::vector<Obstacle> out;
  for (const auto& o : s.objects) {
    if (o.id == s.ee.attached) continue;
    bool skip = false;
    for (const auto& e : exclude)
      if (o.id == e) skip = true;
    if (!skip) out.push_back({o.shape, o.pose});
  }
  return out;
}

// Shared path-following machinery used by every solver's transit phases.
struct MoveCore {
  Pose goal;
  double pos_tol = 0.008;
  double rot_tol = 0.04;
  bool track_rotation = true;
  std::vector<std::string> exclude;
  uint64_t seed = 0;

  std::optional<Path> plan;
  Vec3 plan_goal;
  bool fallback = false;

  void set_goal_position(const Vec3& p) {
    if (distance(p, goal.position) > 1e-9) {
      plan.reset();
      fallback = false;
    }
    goal.position = p;
  }

  bool at_goal(const WorldState& s) const {
    PoseError e = pose_error(s.ee.pose, goal);
    return e.pos <= pos_tol && (!track_rotation || e.rot <= rot_tol);
  }

  Action step_toward(const WorldState& s) {
    const Config& cfg = config();
    const Pose cur = s.ee.pose;
    Action a;
    a.grip = keep_grip(s);

    Vec3 target_pos;
    Quat target_q = track_rotation ? goal.orientation : cur.orientation;
    const double step = 0.035;

    if (!fallback) {
      bool need_plan = !plan.has_value() || distance(plan_goal, goal.position) > 1e-9;
      if (!need_plan) {
        double dev = 1e18;
        for (size_t i = 1; i < plan->waypoints.size(); ++i) {
          // distance to segment
          Vec3 A = plan->waypoints[i - 1].position, B = plan->waypoints[i].position;
          Vec3 ab = B - A;
          double t = ab.dot(ab) > 1e-12
                         ? std::clamp((cur.position - A).dot(ab) / ab.dot(ab), 0.0, 1.0)
                         : 0.0;
          dev = std::min(dev, distance(cur.position, A + ab * t));
        }
        if (plan->waypoints.size() < 2) dev = distance(cur.position, goal.position);
        if (dev > cfg.replan_deviation) need_plan = true;
      }
      if (need_plan) {
        PlanQuery q;
        q.start = cur;
        q.goal = goal;
        q.moving = carry_shape(s);
        q.obstacles = world_obstacles(s, exclude);
        q.bounds_min = {cfg.workspace_min_xy, cfg.workspace_min_xy,
                        std::min({0.02, cur.position.z, goal.position.z})};
        q.bounds_max = {cfg.workspace_max_xy, cfg.workspace_max_xy, cfg.workspace_max_z};
        q.seed = Rng::hash_mix(seed ^ Rng::hash_mix(uint64_t(llround(goal.position.x * 1e6)) ^
                                                    uint64_t(llround(goal.position.y * 1e6)) << 20));
        PlanResult res = rrt_connect(q);
        if (res.ok()) {
          Rng rng(q.seed ^ 0x50071e);
          plan = smooth(res.path, q.moving, q.obstacles, rng, cfg.smooth_attempts);
          plan_goal = goal.position;
        } else {
          // straight-line fallback keeps the oracle moving when a hover goal
          // grazes an inflated obstacle; real obstruction tasks provide
          // plannable goals
          plan.reset();
          fallback = true;
        }
      }
    }

    if (!fallback && plan) {
      // project onto the path, aim a step further along it
      double total = plan->length();
      double best_arc = 0, best_d = 1e18, acc = 0;
      for (size_t i = 1; i < plan->waypoints.size(); ++i) {
        Vec3 A = plan->waypoints[i - 1].position, B = plan->waypoints[i].position;
        Vec3 ab = B - A;
        double len = ab.norm();
        double t = len > 1e-12 ? std::clamp((cur.position - A).dot(ab) / (len * len), 0.0, 1.0)
                               : 0.0;
        double d = distance(cur.position, A + ab * t);
        if (d < best_d) {
          best_d = d;
          best_arc = acc + t * len;
        }
        acc += len;
      }
      Pose tgt = plan->at_arc(std::min(best_arc + step, total));
      target_pos = tgt.position;
      if (track_rotation) target_q = tgt.orientation;
    } else {
      Vec3 delta = goal.position - cur.position;
      double d = delta.norm();
      target_pos = d > step ? cur.position + delta * (step / d) : goal.position;
    }

    a.translation = target_pos - cur.position;
    if (track_rotation) {
      Vec3 drpy = rpy_of(target_q * cur.orientation.conjugate());
      const double rmax = config().max_rotation * 0.9;
      a.rotation = {std::clamp(drpy.x, -rmax, rmax), std::clamp(drpy.y, -rmax, rmax),
                    std::clamp(drpy.z, -rmax, rmax)};
    }
    return a;
  }
};

// ---------------------------------------------------------------------------

class MoveSolver : public SkillSolver {
 public:
  MoveSolver(const Pose& goal, bool track_rotation, double pos_tol, double rot_tol,
             const SolverContext& ctx) {
    core_.goal = goal;
    core_.track_rotation = track_rotation;
    core_.pos_tol = pos_tol;
    core_.rot_tol = rot_tol;
    core_.seed = ctx.seed;
  }

  SolveStep act(const WorldState& s) override {
    SolveStep st;
    st.action.grip = keep_grip(s);
    if (core_.at_goal(s)) {
      st.state = SolveStep::State::done;
      st.phase = "holding position";
      return st;
    }
    st.action = core_.step_toward(s);
    st.phase = "moving the end-effector";
    return st;
  }

  std::string kind() const override { return "Move"; }

 private:
  MoveCore core_;
};

// Pick / carry / place composition; also covers bare Pick via pick_only.
struct PlaceGoal {
  std::string obj;
  std::vector<std::string> bases;
  std::optional<Vec3> position;
  std::optional<double> yaw;  // absolute target yaw of the object
  double tol = 0.05;
  bool pick_only = false;
};

class PickMovePlaceSolver : public SkillSolver {
 public:
  PickMovePlaceSolver(PlaceGoal goal, const SolverContext& ctx) : g_(std::move(goal)), ctx_(ctx) {
    core_.seed = ctx.seed;
    core_.track_rotation = false;
    core_.exclude = {g_.obj};
    for (const auto& b : g_.bases) core_.exclude.push_back(b);
  }

  std::string kind() const override { return g_.pick_only ? "Pick" : "PickMovePlace"; }

  SolveStep act(const WorldState& s) override {
    const Config& cfg = config();
    SolveStep st;
    st.action.grip = keep_grip(s);
    int oi = s.find(g_.obj);
    if (oi < 0) return fail_step("missing object " + g_.obj);
    const WorldObject& o = s.objects[oi];

    if (s.ee.attached == g_.obj) {
      if (g_.pick_only) {
        if (o.bottom_z() >= cfg.pick_min_clearance * 1.5) {
          st.state = SolveStep::State::done;
          st.phase = "holding " + ctx_.describe(g_.obj);
          st.action.grip = 1;
          return st;
        }
        st.action.translation = {0, 0, 0.03};
        st.action.grip = 1;
        st.phase = "lifting " + ctx_.describe(g_.obj);
        return st;
      }
      return place_phase(s, o);
    }

    if (!s.ee.attached.empty()) {
      // holding something else; put it down where we stand
      st.action.grip = -1;
      st.phase = "releasing";
      return st;
    }

    if (o.in_flight) return fail_step(g_.obj + " is airborne");

    if (!g_.pick_only && placed(s, o)) {
      // stay clear so on-top style predicates can latch
      if (s.ee.pose.position.z < o.top_z() + 0.05 &&
          distance_xy(s.ee.pose.position, o.pose.position) < 0.12) {
        st.action.translation = {0, 0, 0.04};
        st.phase = "retreating";
        return st;
      }
      st.state = SolveStep::State::done;
      st.phase = "placed " + ctx_.describe(g_.obj);
      return st;
    }

    return pick_phase(s, o);
  }

 private:
  SolveStep fail_step(const std::string& why) {
    SolveStep st;
    st.state = SolveStep::State::failed;
    st.reason = why;
    return st;
  }

  SolveStep pick_phase(const WorldState& s, const WorldObject& o) {
    SolveStep st;
    st.action.grip = -1;
    double top = o.top_z();
    double z = s.ee.pose.position.z;
    double dxy = distance_xy(s.ee.pose.position, o.pose.position);
    if (dxy > 0.006 || z > top + 0.13) {
      core_.set_goal_position({o.pose.position.x, o.pose.position.y, top + 0.11});
      st.action = core_.step_toward(s);
      st.action.grip = -1;
      st.phase = "moving above " + ctx_.describe(g_.obj);
      return st;
    }
    if (z > top + 0.012) {
      // a hot velocity window at first contact would trip the topple rule
      if (z - top < 0.08 && ee_velocity(s).horizontal().norm() >= 0.12) {
        st.phase = "steadying above " + ctx_.describe(g_.obj);
        return st;
      }
      double dz = std::min(0.03, z - (top + 0.010));
      st.action.translation = {0, 0, -dz};
      st.action.grip = z - top < 0.06 ? 1 : -1;  // suction on for the final approach
      st.phase = "descending to " + ctx_.describe(g_.obj);
      return st;
    }
    st.action.grip = 1;
    st.phase = "closing gripper on " + ctx_.describe(g_.obj);
    return st;
  }

  // xy goal plus the supporting surface under it
  struct Spot {
    Vec3 xy;
    double support_top = 0;
    std::string label;
  };

  Spot target_spot(const WorldState& s, const WorldObject& o) const {
    Spot spot;
    if (!g_.bases.empty()) {
      // nearest acceptable base, slot chosen for multi-object containers
      double best = 1e18;
      const WorldObject* base = nullptr;
      for (const auto& bid : g_.bases) {
        int bi = s.find(bid);
        if (bi < 0) continue;
        double d = distance_xy(o.pose.position, s.objects[bi].pose.position);
        if (d < best) {
          best = d;
          base = &s.objects[bi];
        }
      }
      if (!base) {
        spot.xy = o.pose.position;
        return spot;
      }
      spot.support_top = base->top_z();
      spot.label = base->id;
      spot.xy = base->pose.position;
      if (base->container || base->fixed) {
        double d = std::max(0.025, xy_extent(base->shape) * 0.45);
        const Vec3 offsets[5] = {{0, 0, 0}, {d, 0, 0}, {-d, 0, 0}, {0, d, 0}, {0, -d, 0}};
        int bi = s.find(base->id);
        for (const Vec3& off : offsets) {
          Vec3 cand = base->pose.position + off;
          bool free = true;
          for (int j = 0; j < int(s.objects.size()); ++j) {
            const WorldObject& other = s.objects[j];
            if (other.id == o.id || other.id == base->id || other.fixed) continue;
            if (s.supporter[j] != bi) continue;
            if (distance_xy(other.pose.position, cand) <
                (xy_extent(other.shape) + xy_extent(o.shape)) * 0.9)
              free = false;
          }
          if (free) {
            spot.xy = cand;
            break;
          }
        }
      }
      return spot;
    }
    Vec3 t = *g_.position;
    spot.xy = t;
    spot.label = "target";
    // support under the target point (excluding the carried object)
    double best_top = 0;
    for (int j = 0; j < int(s.objects.size()); ++j) {
      const WorldObject& other = s.objects[j];
      if (other.id == o.id || other.in_flight) continue;
      if (!footprint_of(other.shape, other.pose).contains(t.x, t.y)) continue;
      if (other.top_z() > t.z + 0.02) continue;  // above the requested height
      best_top = std::max(best_top, other.top_z());
    }
    spot.support_top = best_top;
    return spot;
  }

  bool placed(const WorldState& s, const WorldObject& o) const {
    if (o.in_flight || s.ee.attached == o.id) return false;
    if (!g_.bases.empty()) {
      int oi = s.find(o.id);
      int sup = s.supporter[oi];
      bool on = false;
      for (const auto& b : g_.bases)
        if (sup >= 0 && s.objects[sup].id == b) on = true;
      if (!on) return false;
    } else if (distance_xy(o.pose.position, *g_.position) > g_.tol * 0.8) {
      return false;
    }
    if (g_.yaw) {
      double err = std::abs(wrap_angle(yaw_of(o.pose.orientation) - *g_.yaw));
      if (err > 0.05) return false;
    }
    return true;
  }

  SolveStep place_phase(const WorldState& s, const WorldObject& o) {
    SolveStep st;
    st.action.grip = 1;
    Spot spot = target_spot(s, o);
    double offset_z = s.ee.pose.position.z - o.bottom_z();
    double hover_ee_z = spot.support_top + 0.09 + offset_z;
    double drop_ee_z = spot.support_top + 0.008 + offset_z;

    double dxy = distance_xy(o.pose.position, {spot.xy.x, spot.xy.y, 0});
    double yaw_err = 0;
    if (g_.yaw) yaw_err = std::abs(wrap_angle(yaw_of(o.pose.orientation) - *g_.yaw));

    if (dxy > 0.01 || yaw_err > 0.03) {
      // carry at hover height; rotate the wrist so the cargo lands at the
      // requested yaw
      Vec3 ee_goal = {spot.xy.x + (s.ee.pose.position.x - o.pose.position.x),
                      spot.xy.y + (s.ee.pose.position.y - o.pose.position.y),
                      std::max(hover_ee_z, s.ee.pose.position.z * 0.0 + hover_ee_z)};
      core_.set_goal_position(ee_goal);
      st.action = core_.step_toward(s);
      st.action.grip = 1;
      if (g_.yaw) {
        double d = wrap_angle(*g_.yaw - yaw_of(o.pose.orientation));
        st.action.rotation = {0, 0, std::clamp(d, -config().max_rotation * 0.9,
                                                config().max_rotation * 0.9)};
      }
      st.phase = "carrying " + ctx_.describe(g_.obj) +
                 (spot.label.empty() || spot.label == "target"
                      ? " to its target"
                      : " towards " + ctx_.describe(spot.label));
      return st;
    }
    if (s.ee.pose.position.z > drop_ee_z + 0.006) {
      double dz = std::min(0.03, s.ee.pose.position.z - drop_ee_z);
      st.action.translation = {0, 0, -dz};
      st.phase = "lowering " + ctx_.describe(g_.obj);
      return st;
    }
    if (ee_velocity(s).norm() > 0.12) {
      st.phase = "steadying";
      return st;
    }
    st.action.grip = -1;
    st.phase = "releasing " + ctx_.describe(g_.obj);
    return st;
  }

  PlaceGoal g_;
  SolverContext ctx_;
  MoveCore core_;
};

class TouchSolver : public SkillSolver {
 public:
  TouchSolver(std::string obj, const SolverContext& ctx) : obj_(std::move(obj)), ctx_(ctx) {
    core_.seed = ctx.seed;
    core_.track_rotation = false;
    core_.exclude = {obj_};
  }

  std::string kind() const override { return "Touch"; }

  SolveStep act(const WorldState& s) override {
    SolveStep st;
    st.action.grip = -1;
    int oi = s.find(obj_);
    if (oi < 0) {
      st.state = SolveStep::State::failed;
      st.reason = "missing object";
      return st;
    }
    const WorldObject& o = s.objects[oi];
    if (s.has_event(Event::Type::contact, "ee", obj_)) {
      st.state = SolveStep::State::done;
      st.phase = "touched " + ctx_.describe(obj_);
      return st;
    }
    double top = o.top_z();
    double dxy = distance_xy(s.ee.pose.position, o.pose.position);
    if (dxy > 0.005 || s.ee.pose.position.z > top + 0.09) {
      core_.set_goal_position({o.pose.position.x, o.pose.position.y, top + 0.07});
      st.action = core_.step_toward(s);
      st.action.grip = -1;
      st.phase = "moving above " + ctx_.describe(obj_);
      return st;
    }
    if (s.ee.pose.position.z < top - 0.015) {
      st.state = SolveStep::State::failed;
      st.reason = "missed the touch";
      return st;
    }
    if (ee_velocity(s).horizontal().norm() >= 0.12) {
      st.phase = "steadying above " + ctx_.describe(obj_);
      return st;
    }
    st.action.translation = {0, 0, -0.008};
    st.phase = "touching " + ctx_.describe(obj_);
    return st;
  }

 private:
  std::string obj_;
  SolverContext ctx_;
  MoveCore core_;
};

class PushSolver : public SkillSolver {
 public:
  // Two stop rules: reach a target point, or get far enough from a start.
  struct Goal {
    std::string obj;
    std::string goal_obj;           // push towards this object when set
    std::optional<Vec3> target;     // or towards this fixed point
    double stop_dist = 0.03;        // done when distance-to-target <= this
    std::optional<Vec3> away_from;  // push-away mode origin
    double away_dist = 0.13;        // done when distance-from-origin >= this
  };

  PushSolver(Goal g, const SolverContext& ctx) : g_(std::move(g)), ctx_(ctx) {
    core_.seed = ctx.seed;
    core_.track_rotation = false;
    core_.exclude = {g_.obj};
  }

  std::string kind() const override { return "Push"; }

  SolveStep act(const WorldState& s) override {
    SolveStep st;
    st.action.grip = -1;
    int oi = s.find(g_.obj);
    if (oi < 0) {
      st.state = SolveStep::State::failed;
      st.reason = "missing object";
      return st;
    }
    const WorldObject& o = s.objects[oi];

    Vec3 target;
    bool done = false;
    if (g_.away_from) {
      double moved = distance_xy(o.pose.position, *g_.away_from);
      done = moved >= g_.away_dist;
      Vec3 dir = (o.pose.position - *g_.away_from).horizontal();
      if (dir.norm() < 1e-6) dir = o.pose.position.horizontal();
      if (dir.norm() < 1e-6) dir = {1, 0, 0};
      target = o.pose.position + dir.normalized() * std::max(0.05, g_.away_dist + 0.05 - moved);
    } else {
      if (!g_.goal_obj.empty()) {
        int gi = s.find(g_.goal_obj);
        if (gi < 0) {
          st.state = SolveStep::State::failed;
          st.reason = "missing goal object";
          return st;
        }
        target = s.objects[gi].pose.position;
      } else {
        target = *g_.target;
      }
      done = distance_xy(o.pose.position, target) <= g_.stop_dist;
    }

    if (done) {
      if (collide(ee_shape(), ee_pose(s), o.shape, o.pose)) {
        st.action.translation = {0, 0, 0.04};
        st.phase = "retreating";
        return st;
      }
      st.state = SolveStep::State::done;
      st.phase = "pushed " + ctx_.describe(g_.obj);
      return st;
    }

    Vec3 dir = (target - o.pose.position).horizontal();
    double remaining = dir.norm();
    dir = dir.normalized();
    double stage_back = extent_along(o, -1.0 * dir) + config().ee_radius + 0.018;
    Vec3 stage = o.pose.position - dir * stage_back;
    double push_z = std::max(0.012, o.bottom_z() + 0.45 * o.height());
    push_z = std::min(push_z, o.top_z() - 0.005);

    // in-corridor check: behind the object, aligned with the push line
    Vec3 rel = (s.ee.pose.position - stage).horizontal();
    double along = rel.dot(dir);
    double perp = (rel - dir * along).norm();
    bool z_ok = std::abs(s.ee.pose.position.z - push_z) < 0.02;
    if (along > -0.02 && along < stage_back + 0.02 && perp < 0.014 && z_ok) {
      double stop = g_.away_from ? 0.0 : g_.stop_dist * 0.5;
      double step = std::clamp((remaining - stop) * 0.5, 0.004, 0.012);
      st.action.translation = dir * step;
      st.phase = "pushing " + ctx_.describe(g_.obj);
      return st;
    }
    if (distance_xy(s.ee.pose.position, stage) < 0.012 &&
        s.ee.pose.position.z > push_z + 0.012) {
      st.action.translation = {0, 0, -std::min(0.035, s.ee.pose.position.z - push_z)};
      st.phase = "lowering behind " + ctx_.describe(g_.obj);
      return st;
    }
    core_.set_goal_position({stage.x, stage.y, o.top_z() + 0.09});
    st.action = core_.step_toward(s);
    st.action.grip = -1;
    st.phase = "moving behind " + ctx_.describe(g_.obj);
    return st;
  }

 private:
  Goal g_;
  SolverContext ctx_;
  MoveCore core_;
};

class ToppleSolver : public SkillSolver {
 public:
  ToppleSolver(std::vector<std::string> objs, bool structure, const SolverContext& ctx)
      : objs_(std::move(objs)), structure_(structure), ctx_(ctx) {
    core_.seed = ctx.seed;
    core_.track_rotation = false;
  }

  std::string kind() const override { return "ToppleStructure"; }

  SolveStep act(const WorldState& s) override {
    SolveStep st;
    st.action.grip = -1;
    const WorldObject* target = nullptr;
    if (structure_) {
      double best_top = -1;
      for (const auto& id : objs_) {
        int i = s.find(id);
        if (i < 0) continue;
        if (s.supporter[i] == kSupportTable && !s.objects[i].in_flight) continue;
        if (s.objects[i].top_z() > best_top) {
          best_top = s.objects[i].top_z();
          target = &s.objects[i];
        }
      }
    } else {
      int i = s.find(objs_.at(0));
      if (i >= 0 && !s.objects[i].toppled) target = &s.objects[i];
    }
    if (!target) {
      st.state = SolveStep::State::done;
      st.phase = "toppled";
      return st;
    }
    const WorldObject& o = *target;
    core_.exclude = {o.id};

    Vec3 dir = o.pose.position.horizontal();
    dir = dir.norm() > 0.05 ? dir.normalized() : Vec3{1, 0, 0};
    double sweep_z = std::clamp(o.bottom_z() + 0.8 * o.height(), o.bottom_z() + 0.01,
                                o.top_z() - 0.004);
    double back = extent_along(o, -1.0 * dir) + config().ee_radius + 0.022;
    Vec3 stage = o.pose.position - dir * back;

    Vec3 rel = (s.ee.pose.position - stage).horizontal();
    double along = rel.dot(dir);
    double perp = (rel - dir * along).norm();
    bool z_ok = std::abs(s.ee.pose.position.z - sweep_z) < 0.02;
    if (along > -0.02 && along < back + extent_along(o, dir) + 0.06 && perp < 0.014 && z_ok) {
      st.action.translation = dir * 0.035;  // fast enough to tip, low enough to clamp
      st.phase = "sweeping " + ctx_.describe(o.id);
      return st;
    }
    if (distance_xy(s.ee.pose.position, stage) < 0.012 && s.ee.pose.position.z > sweep_z + 0.012) {
      st.action.translation = {0, 0, -std::min(0.035, s.ee.pose.position.z - sweep_z)};
      st.phase = "lowering beside " + ctx_.describe(o.id);
      return st;
    }
    core_.set_goal_position({stage.x, stage.y, o.top_z() + 0.10});
    st.action = core_.step_toward(s);
    st.action.grip = -1;
    st.phase = "approaching " + ctx_.describe(o.id);
    return st;
  }

 private:
  std::vector<std::string> objs_;
  bool structure_;
  SolverContext ctx_;
  MoveCore core_;
};

class TraceSolver : public SkillSolver {
 public:
  explicit TraceSolver(const SolverContext&) {}
  std::string kind() const override { return "Trace"; }

  SolveStep act(const WorldState& s) override {
    SolveStep st;
    st.action.grip = -1;
    const TraceGoal* active = nullptr;
    int idx = 0;
    for (size_t i = 0; i < s.goals.size(); ++i) {
      if (s.goals[i].status == TraceGoal::Status::active) {
        active = &s.goals[i];
        idx = int(i);
        break;
      }
    }
    if (!active) {
      st.state = SolveStep::State::done;
      st.phase = "traced all goals";
      return st;
    }
    Vec3 delta = active->position - s.ee.pose.position;
    double d = delta.norm();
    double step = std::min(0.035, d);
    st.action.translation = d > 1e-9 ? delta * (step / d) : Vec3{};
    st.phase = "moving to goal " + std::to_string(idx + 1);
    return st;
  }
};

class BalanceScaleSolver : public SkillSolver {
 public:
  explicit BalanceScaleSolver(const SolverContext&) {}
  std::string kind() const override { return "BalanceScale"; }

  SolveStep act(const WorldState& s) override {
    SolveStep st;
    st.action.grip = keep_grip(s);
    if (scale_balanced(s)) {
      st.state = SolveStep::State::done;
      st.phase = "scale balanced";
      return st;
    }
    st.state = SolveStep::State::failed;
    st.reason = "scale did not balance after placement";
    return st;
  }
};

class HitSolver : public SkillSolver {
 public:
  HitSolver(std::string thrown, std::string target, const SolverContext& ctx)
      : thrown_(std::move(thrown)), target_(std::move(target)), ctx_(ctx) {
    PlaceGoal pg;
    pg.obj = thrown_;
    pg.pick_only = true;
    pick_ = std::make_unique<PickMovePlaceSolver>(pg, ctx);
    core_.seed = ctx.seed ^ 0x7712;
    core_.track_rotation = false;
    core_.exclude = {thrown_, target_};
  }

  std::string kind() const override { return "Hit"; }

  SolveStep act(const WorldState& s) override {
    const Config& cfg = config();
    SolveStep st;
    int oi = s.find(thrown_), ti = s.find(target_);
    if (oi < 0 || ti < 0) {
      st.state = SolveStep::State::failed;
      st.reason = "missing object";
      return st;
    }
    const WorldObject& o = s.objects[oi];
    const WorldObject& tgt = s.objects[ti];

    if (o.in_flight) {
      st.action.grip = -1;
      st.phase = "watching the throw";
      return st;
    }
    if (s.ee.attached != thrown_) {
      SolveStep ps = pick_->act(s);
      if (ps.state == SolveStep::State::done) {
        ps.state = SolveStep::State::running;  // keep going: aim next step
        ps.phase = "ready to aim";
      }
      return ps;
    }

    // aim point: top center of the target
    Vec3 aim = tgt.pose.position;
    aim.z = tgt.top_z() + (tgt.fixed ? world_half_height(o.shape, o.pose.orientation) : 0.0);

    ThrowPlan plan;
    if (!plan_throw(s, aim, plan)) {
      st.state = SolveStep::State::failed;
      st.reason = "no feasible launch inside the workspace";
      return st;
    }

    Vec3 rel = s.ee.pose.position - plan.run_start;
    double along = rel.dot(plan.dir3);
    double perp = (rel - plan.dir3 * along).norm();

    if (along >= -0.01 && perp < 0.02) {
      // on the run: release the moment the window velocity carries the cargo
      // onto the target
      Vec3 v = ee_velocity(s);
      if (v.norm() > 0.3 * plan.speed) {
        Vec3 p = o.pose.position + v * cfg.dt;  // release happens after this step's motion
        double dz = std::max(0.0, p.z - aim.z);
        double t_land = (v.z + std::sqrt(v.z * v.z + 2 * cfg.gravity * dz)) / cfg.gravity;
        Vec3 land = p + Vec3{v.x, v.y, 0} * t_land;
        if (std::hypot(land.x - aim.x, land.y - aim.y) <= 0.025) {
          st.action.translation = plan.dir3 * (plan.speed * cfg.dt);
          st.action.grip = -1;
          st.phase = "throwing " + ctx_.describe(thrown_);
          return st;
        }
      }
      if (along > plan.run_len + 0.25) {
        st.state = SolveStep::State::failed;
        st.reason = "missed the release window";
        return st;
      }
      st.action.translation = plan.dir3 * (plan.speed * cfg.dt);
      st.action.grip = 1;
      st.phase = "accelerating " + ctx_.describe(thrown_);
      return st;
    }

    core_.set_goal_position(plan.run_start);
    st.action = core_.step_toward(s);
    st.action.grip = 1;
    st.phase = "aiming " + ctx_.describe(thrown_) + " at " + ctx_.describe(target_);
    return st;
  }

 private:
  struct ThrowPlan {
    Vec3 run_start;
    Vec3 dir3;
    double speed = 0;
    double run_len = 0;
  };

  bool plan_throw(const WorldState& s, const Vec3& aim, ThrowPlan& out) const {
    const Config& cfg = config();
    Vec3 u = aim.horizontal();
    u = u.norm() > 0.05 ? u.normalized() : Vec3{1, 0, 0};
    const double lo = cfg.workspace_min_xy + 0.05, hi = cfg.workspace_max_xy - 0.05;
    const double angles[2] = {cfg.throw_angle_deg * kDeg, 60.0 * kDeg};
    for (double angle : angles) {
      for (double df = 0.28; df <= 0.80; df += 0.04) {
        Vec3 release{aim.x - u.x * df, aim.y - u.y * df,
                     std::clamp(std::max(0.28, aim.z + 0.10), 0.12, 0.60)};
        if (release.x < lo || release.x > hi || release.y < lo || release.y > hi) continue;
        auto v = ballistic_release(release, aim, angle);
        if (!v) continue;
        double speed = v->norm();
        if (speed > cfg.throw_max_speed || speed < cfg.in_flight_min_speed + 0.1) continue;
        Vec3 dir3 = v->normalized();
        double run_len = double(cfg.velocity_window) * speed * cfg.dt;
        Vec3 start = release - dir3 * (run_len + 0.02);
        if (start.x < lo || start.x > hi || start.y < lo || start.y > hi) continue;
        if (start.z < 0.04 || release.z > cfg.workspace_max_z - 0.05) continue;
        out.run_start = start;
        out.dir3 = dir3;
        out.speed = speed;
        out.run_len = run_len;
        (void)s;
        return true;
      }
    }
    return false;
  }

  std::string thrown_, target_;
  SolverContext ctx_;
  MoveCore core_;
  std::unique_ptr<PickMovePlaceSolver> pick_;
};

// ---------------------------------------------------------------------------
// scheduling

const Predicate* next_in(const Predicate& p, const WorldState& s);

const Predicate* best_of_set(const Predicate& p, const WorldState& s) {
  const Predicate* best = nullptr;
  double best_d = 1e18;
  for (const auto& ch : p.children) {
    if (is_constraint(ch) || ch.done() || ch.failed()) continue;
    const Predicate* cand = next_in(ch, s);
    if (!cand) continue;
    double d = distance(s.ee.pose.position, predicate_focus(*cand, s));
    if (d < best_d) {
      best_d = d;
      best = cand;
    }
  }
  return best;
}

const Predicate* next_in(const Predicate& p, const WorldState& s) {
  if (p.failed()) return nullptr;
  switch (p.kind) {
    case PredKind::set_all:
      if (p.children.empty()) return nullptr;
      return best_of_set(p, s);
    case PredKind::sequence:
      for (const auto& ch : p.children) {
        if (ch.done() || is_constraint(ch)) continue;
        return next_in(ch, s);
      }
      return nullptr;
    case PredKind::once:
      return p.children.empty() ? nullptr : next_in(p.children[0], s);
    case PredKind::not_touching:
      return nullptr;
    default:
      return p.done() ? nullptr : &p;
  }
}

int node_ordinal(const Predicate& root, const Predicate* node) {
  int counter = 0;
  int found = -1;
  std::function<void(const Predicate&)> walk = [&](const Predicate& p) {
    if (&p == node) found = counter;
    ++counter;
    for (const auto& ch : p.children) walk(ch);
  };
  walk(root);
  return found;
}

bool path_of(const Predicate& root, const Predicate* node, std::vector<int>& out) {
  if (&root == node) return true;
  for (int i = 0; i < int(root.children.size()); ++i) {
    out.push_back(i);
    if (path_of(root.children[i], node, out)) return true;
    out.pop_back();
  }
  return false;
}

const Predicate* node_at_const(const Predicate& root, const std::vector<int>& path) {
  const Predicate* p = &root;
  for (int i : path) {
    if (i < 0 || i >= int(p->children.size())) return nullptr;
    p = &p->children[i];
  }
  return p;
}

bool tree_forbids_grasp(const Predicate& p, const std::string& obj) {
  if (p.forbid_grasp && !p.objects.empty() && p.objects[0] == obj) return true;
  for (const auto& ch : p.children)
    if (tree_forbids_grasp(ch, obj)) return true;
  return false;
}

void gather_reserved(const Predicate& p, const WorldState& s, std::vector<Vec3>& out) {
  if (p.kind == PredKind::at_pos || p.kind == PredKind::at_pose)
    out.push_back(p.kind == PredKind::at_pos ? p.target_pos : p.target_pose.position);
  for (const auto& b : p.bases) {
    int i = s.find(b);
    if (i >= 0) out.push_back(s.objects[i].pose.position);
  }
  for (const auto& ch : p.children) gather_reserved(ch, s, out);
}

std::optional<Vec3> staging_spot(const WorldState& s, const Predicate& tree,
                                 const std::string& moving_id) {
  std::vector<Vec3> reserved;
  gather_reserved(tree, s, reserved);
  int mi = s.find(moving_id);
  double mext = mi >= 0 ? xy_extent(s.objects[mi].shape) : 0.04;
  const Config& cfg = config();
  for (double y = cfg.spawn_min_xy + 0.03; y <= cfg.spawn_max_xy - 0.03; y += 0.07) {
    for (double x = cfg.spawn_min_xy + 0.03; x <= cfg.spawn_max_xy - 0.03; x += 0.07) {
      Vec3 cand{x, y, 0};
      bool ok = true;
      for (const auto& r : reserved)
        if (distance_xy(cand, r) < 0.11) ok = false;
      for (const auto& o : s.objects) {
        if (o.id == moving_id) continue;
        if (distance_xy(cand, o.pose.position) < xy_extent(o.shape) + mext + 0.02) ok = false;
      }
      if (ok) return cand;
    }
  }
  return std::nullopt;
}

// another movable object parked on the target spot of a position goal
std::string find_blocker(const WorldState& s, const Predicate& leaf) {
  if (leaf.kind != PredKind::at_pos && leaf.kind != PredKind::at_pose) return "";
  Vec3 target = leaf.kind == PredKind::at_pos ? leaf.target_pos : leaf.target_pose.position;
  int oi = s.find(leaf.objects.at(0));
  if (oi < 0) return "";
  double oext = xy_extent(s.objects[oi].shape);
  std::string best;
  double best_d = 1e18;
  for (const auto& other : s.objects) {
    if (other.id == leaf.objects[0] || other.fixed || other.in_flight) continue;
    if (other.id == s.ee.attached) continue;
    double d = distance_xy(other.pose.position, target);
    if (d < (xy_extent(other.shape) + oext) * 0.85 && d < best_d) {
      best_d = d;
      best = other.id;
    }
  }
  return best;
}

}  // namespace

const Predicate* next_predicate(const Predicate& tree, const WorldState& s) {
  return next_in(tree, s);
}

std::unique_ptr<SkillSolver> solver_for(const Predicate& p, const SolverContext& ctx) {
  switch (p.kind) {
    case PredKind::ee_at_pos: {
      Pose goal{p.target_pos, Quat::identity()};
      return std::make_unique<MoveSolver>(goal, false, std::max(0.005, p.tolerance * 0.4), 0.0,
                                          ctx);
    }
    case PredKind::ee_at_pose:
      return std::make_unique<MoveSolver>(p.target_pose, true, 0.012, 0.10, ctx);
    case PredKind::at_pos: {
      if (p.forbid_grasp) {
        PushSolver::Goal g;
        g.obj = p.objects[0];
        g.target = p.target_pos;
        g.stop_dist = p.tolerance * 0.5;
        return std::make_unique<PushSolver>(g, ctx);
      }
      PlaceGoal g;
      g.obj = p.objects[0];
      g.position = p.target_pos;
      g.tol = p.tolerance;
      return std::make_unique<PickMovePlaceSolver>(g, ctx);
    }
    case PredKind::at_pose: {
      PlaceGoal g;
      g.obj = p.objects[0];
      g.position = p.target_pose.position;
      g.yaw = yaw_of(p.target_pose.orientation);
      g.tol = p.tolerance;
      return std::make_unique<PickMovePlaceSolver>(g, ctx);
    }
    case PredKind::on_top:
    case PredKind::inside: {
      PlaceGoal g;
      g.obj = p.objects[0];
      g.bases = p.bases;
      return std::make_unique<PickMovePlaceSolver>(g, ctx);
    }
    case PredKind::picked: {
      PlaceGoal g;
      g.obj = p.objects[0];
      g.pick_only = true;
      return std::make_unique<PickMovePlaceSolver>(g, ctx);
    }
    case PredKind::touch:
      if (p.touch_mode == TouchMode::gentle)
        return std::make_unique<TouchSolver>(p.objects[0], ctx);
      if (p.touch_mode == TouchMode::push) {
        PushSolver::Goal g;
        g.obj = p.objects[0];
        g.away_from = p.baseline_pos;
        g.away_dist = p.min_move * 1.3;
        return std::make_unique<PushSolver>(g, ctx);
      }
      return std::make_unique<ToppleSolver>(std::vector<std::string>{p.objects[0]}, false, ctx);
    case PredKind::touched_gently:
      return std::make_unique<TouchSolver>(p.objects[0], ctx);
    case PredKind::touch_pushed: {
      PushSolver::Goal g;
      g.obj = p.objects[0];
      g.away_from = p.baseline_pos;
      g.away_dist = p.min_move * 1.3;
      return std::make_unique<PushSolver>(g, ctx);
    }
    case PredKind::hit:
      return std::make_unique<HitSolver>(p.objects[0], p.bases.at(0), ctx);
    case PredKind::topple_structure:
      return std::make_unique<ToppleSolver>(p.objects, true, ctx);
    case PredKind::push_progress: {
      PushSolver::Goal g;
      g.obj = p.objects[0];
      g.goal_obj = p.bases.at(0);
      g.stop_dist = p.baseline_dist * (1.0 - p.reduce_frac) * 0.88;
      return std::make_unique<PushSolver>(g, ctx);
    }
    case PredKind::rotated_by: {
      PlaceGoal g;
      g.obj = p.objects[0];
      g.position = p.baseline_pos;
      double target = p.restore ? 0.0 : p.angle_deg * kDeg * p.direction;
      g.yaw = wrap_angle(p.baseline_yaw + target);
      g.tol = p.pos_tol;
      return std::make_unique<PickMovePlaceSolver>(g, ctx);
    }
    case PredKind::balanced:
      return std::make_unique<BalanceScaleSolver>(ctx);
    case PredKind::trace_goals:
      return std::make_unique<TraceSolver>(ctx);
    default:
      fail(Errc::invalid_arg, "no solver maps to this predicate");
  }
}

OraclePolicy::OraclePolicy(const TaskInstance& instance) {
  ctx_.seed = Rng::hash_mix(instance.seed ^ Rng::hash_str(instance.task.name));
  ctx_.descriptions = &instance.descriptions;
}

void OraclePolicy::reset_solvers() { cache_.clear(); }

OraclePolicy::Result OraclePolicy::act(Env& env) {
  const Config& cfg = config();
  const WorldState& s = env.state();
  Predicate& tree = env.tree_for_scheduling();
  Result out;
  out.action.grip = keep_grip(s);

  // stick with the committed predicate until it resolves; re-picking each
  // step makes the greedy rule oscillate between equidistant targets
  const Predicate* leaf = nullptr;
  if (has_current_) {
    const Predicate* cur = node_at_const(tree, current_path_);
    if (cur && cur->children.empty() && !cur->done() && !cur->failed() && !is_constraint(*cur))
      leaf = cur;
  }
  if (!leaf) {
    leaf = next_predicate(tree, s);
    if (leaf) {
      current_path_.clear();
      has_current_ = path_of(tree, leaf, current_path_);
    }
  }
  if (!leaf) {
    out.tree_done = true;
    out.phase = "idle";
    return out;
  }
  out.active = leaf;

  std::string key = std::to_string(node_ordinal(tree, leaf));
  std::unique_ptr<SkillSolver>* slot = nullptr;

  // a blocker parked on the target spot gets evicted first
  std::string blocker = find_blocker(s, *leaf);
  if (!blocker.empty() && evictions_ <= cfg.max_evictions) {
    key += "#evict:" + blocker;
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      auto spot = staging_spot(s, tree, blocker);
      if (spot) {
        ++evictions_;
        std::unique_ptr<SkillSolver> ev;
        if (tree_forbids_grasp(tree, blocker)) {
          PushSolver::Goal g;
          g.obj = blocker;
          g.target = *spot;
          g.stop_dist = 0.035;
          ev = std::make_unique<PushSolver>(g, ctx_);
        } else {
          PlaceGoal g;
          g.obj = blocker;
          g.position = *spot;
          g.tol = 0.06;
          ev = std::make_unique<PickMovePlaceSolver>(g, ctx_);
        }
        cache_[key] = std::move(ev);
      }
    }
    slot = cache_.count(key) ? &cache_[key] : nullptr;
  }

  if (!slot) {
    key = std::to_string(node_ordinal(tree, leaf));
    if (!cache_.count(key)) cache_[key] = solver_for(*leaf, ctx_);
    slot = &cache_[key];
  }

  SolveStep st = (*slot)->act(s);
  out.solver_kind = (*slot)->kind();
  out.phase = st.phase;
  kinds_used_.insert(out.solver_kind);

  if (st.state == SolveStep::State::failed) {
    cache_.erase(key);
    ++failures_;
    if (failures_ > 40) {
      out.gave_up = true;
      out.fail_reason = st.reason;
    }
    out.action.grip = keep_grip(s);
    return out;
  }
  if (st.state == SolveStep::State::done) {
    // solver believes it finished but the predicate has not latched yet;
    // rebuild so the fresh solver re-derives its phase from the state
    cache_.erase(key);
    ++stall_steps_;
    if (stall_steps_ > 80) {
      out.gave_up = true;
      out.fail_reason = "no progress on " + to_text(*leaf);
    }
    out.action = st.action;
    return out;
  }
  stall_steps_ = 0;

  // oracle actions always respect the clamps
  Action a = st.action;
  const double tmax = cfg.max_translation - 1e-9, rmax = cfg.max_rotation - 1e-9;
  a.translation = {std::clamp(a.translation.x, -tmax, tmax),
                   std::clamp(a.translation.y, -tmax, tmax),
                   std::clamp(a.translation.z, -tmax, tmax)};
  a.rotation = {std::clamp(a.rotation.x, -rmax, rmax), std::clamp(a.rotation.y, -rmax, rmax),
                std::clamp(a.rotation.z, -rmax, rmax)};
  out.action = a;
  return out;
}

}  // namespace dsk
