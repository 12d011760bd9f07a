#include "core/world.hpp"

#include <algorithm>
#include <cmath>

#include "core/config.hpp"
#include "core/error.hpp"

namespace dsk {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clampd(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

Action clamp_action(const Action& a) {
  const Config& cfg = config();
  Action out;
  out.translation = {clampd(a.translation.x, -cfg.max_translation, cfg.max_translation),
                     clampd(a.translation.y, -cfg.max_translation, cfg.max_translation),
                     clampd(a.translation.z, -cfg.max_translation, cfg.max_translation)};
  out.rotation = {clampd(a.rotation.x, -cfg.max_rotation, cfg.max_rotation),
                  clampd(a.rotation.y, -cfg.max_rotation, cfg.max_rotation),
                  clampd(a.rotation.z, -cfg.max_rotation, cfg.max_rotation)};
  out.grip = clampd(a.grip, -1.0, 1.0);
  return out;
}

int attached_index(const WorldState& s) {
  return s.ee.attached.empty() ? -1 : s.find(s.ee.attached);
}

bool can_topple(const WorldObject& o) {
  return !o.fixed && o.shape.kind != ShapeKind::sphere &&
         vertical_axis_deviation(o) <= config().topple_deviation;
}

void emit(WorldState& s, Event e) { s.events.push_back(std::move(e)); }

void topple_object(WorldState& s, int i, Vec3 dir, std::vector<char>& moved) {
  WorldObject& o = s.objects[i];
  Vec3 d = dir.horizontal().normalized();
  if (d.norm() < 0.5) d = {1, 0, 0};
  double half_before = world_half_height(o.shape, o.pose.orientation);
  Vec3 axis = Vec3{0, 0, 1}.cross(d);
  o.pose.orientation = Quat::from_axis_angle(axis, kPi / 2) * o.pose.orientation;
  double half_after = world_half_height(o.shape, o.pose.orientation);
  o.pose.position += d * (half_before + half_after);
  s.supporter[i] = kSupportNone;
  moved[i] = 1;
  emit(s, {Event::Type::toppled, o.id, "", 0, -1});
}

// Lowers object i onto the highest admissible surface under it.
int settle_object(WorldState& s, int i) {
  const Config& cfg = config();
  WorldObject& o = s.objects[i];
  double bottom = o.bottom_z();
  int att = attached_index(s);
  double best_top = 0.0;
  int best = kSupportTable;
  for (int j = 0; j < int(s.objects.size()); ++j) {
    if (j == i || j == att) continue;
    const WorldObject& b = s.objects[j];
    if (b.in_flight) continue;
    double t = b.top_z();
    if (t > bottom + 1e-6 || t <= best_top) continue;
    // cheap reject before the sampled overlap
    double reach = o.shape.bounding_radius() + b.shape.bounding_radius();
    if (distance_xy(o.pose.position, b.pose.position) > reach) continue;
    if (footprint_overlap(o.shape, o.pose, b.shape, b.pose) < cfg.support_min_overlap) continue;
    best = j;
    best_top = t;
  }
  o.pose.position.z = resting_z(o.shape, o.pose.orientation, best_top);
  s.supporter[i] = best;
  return best;
}

// Re-settles everything whose support became invalid. Bounded fixpoint.
void resettle(WorldState& s, std::vector<char>& moved) {
  int att = attached_index(s);
  for (int guard = 0; guard < 16; ++guard) {
    bool changed = false;
    std::vector<int> order(s.objects.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = int(k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return s.objects[a].bottom_z() < s.objects[b].bottom_z();
    });
    for (int i : order) {
      const WorldObject& o = s.objects[i];
      if (o.fixed || o.in_flight || i == att) continue;
      bool need = moved[i] != 0;
      if (!need) {
        int sup = s.supporter[i];
        if (sup == kSupportNone) {
          need = true;
        } else if (sup >= 0) {
          const WorldObject& b = s.objects[sup];
          if (sup == att || b.in_flight || moved[sup] ||
              std::abs(b.top_z() - o.bottom_z()) > 1e-6)
            need = true;
        } else if (std::abs(o.bottom_z()) > 1e-6) {
          need = true;
        }
      }
      if (!need) continue;
      double z_before = o.pose.position.z;
      settle_object(s, i);
      if (std::abs(s.objects[i].pose.position.z - z_before) > 1e-12) {
        moved[i] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
}

// Horizontal separation of interpenetrating movable objects.
bool resolve_penetrations_once(WorldState& s, std::vector<char>& moved) {
  const Config& cfg = config();
  int att = attached_index(s);
  bool any = false;
  for (int i = 0; i < int(s.objects.size()); ++i) {
    for (int j = i + 1; j < int(s.objects.size()); ++j) {
      WorldObject& a = s.objects[i];
      WorldObject& b = s.objects[j];
      if (a.in_flight || b.in_flight) continue;
      if (a.fixed && b.fixed) continue;
      if (i == att || j == att) continue;
      double reach = a.shape.bounding_radius() + b.shape.bounding_radius();
      if (distance(a.pose.position, b.pose.position) > reach) continue;
      auto c = collide(a.shape, a.pose, b.shape, b.pose);
      if (!c || c->depth <= cfg.penetration_tol) continue;
      Vec3 nh = c->normal.horizontal();
      double nhn = nh.norm();
      if (nhn <= 0.5) continue;  // vertical contact: stacking, settle handles it
      emit(s, {Event::Type::contact, a.id, b.id, 0, -1});
      int pushee;
      double sign;
      if (a.fixed) { pushee = j; sign = 1; }
      else if (b.fixed) { pushee = i; sign = -1; }
      else if (moved[i] && !moved[j]) { pushee = j; sign = 1; }
      else if (moved[j] && !moved[i]) { pushee = i; sign = -1; }
      else { pushee = j; sign = 1; }
      double dist = std::min(c->depth / nhn, 0.05) + 1e-6;
      s.objects[pushee].pose.position += nh * (sign * dist / nhn);
      moved[pushee] = 1;
      any = true;
    }
  }
  return any;
}

void contact_push_pass(WorldState& s, std::vector<char>& moved) {
  const Config& cfg = config();
  int att = attached_index(s);
  Vec3 vel = ee_velocity(s);
  double speed_h = vel.horizontal().norm();
  double speed = vel.norm();

  struct Pusher {
    Shape shape;
    Pose pose;
    std::string id;
    int self = -1;
  };
  std::vector<Pusher> pushers;
  pushers.push_back({ee_shape(), ee_pose(s), "ee", -1});
  if (att >= 0)
    pushers.push_back({s.objects[att].shape, s.objects[att].pose, s.objects[att].id, att});

  for (const Pusher& p : pushers) {
    for (int i = 0; i < int(s.objects.size()); ++i) {
      if (i == att || i == p.self) continue;
      WorldObject& o = s.objects[i];
      if (o.in_flight) continue;
      double reach = p.shape.bounding_radius() + o.shape.bounding_radius();
      if (distance(p.pose.position, o.pose.position) > reach) continue;
      auto c = collide(p.shape, p.pose, o.shape, o.pose);
      if (!c) continue;
      emit(s, {Event::Type::contact, p.id, o.id, speed, -1});
      if (o.fixed) continue;
      double h = o.height();
      double frac = h > 1e-9 ? (c->point.z - o.bottom_z()) / h : 0.0;
      if (can_topple(o) && frac > cfg.topple_ee_height_frac && speed_h >= cfg.topple_ee_speed) {
        Vec3 dir = c->normal.horizontal();
        if (dir.norm() < 1e-6) dir = vel.horizontal();
        topple_object(s, i, dir, moved);
        continue;
      }
      Vec3 nh = c->normal.horizontal();
      double nhn = nh.norm();
      if (nhn > 0.5 && c->depth > 0) {
        double dist = std::min(c->depth / nhn, 0.08);
        o.pose.position += nh * (dist / nhn);
        moved[i] = 1;
      }
    }
  }
}

void try_attach(WorldState& s) {
  const Config& cfg = config();
  const Vec3 tip = s.ee.pose.position;
  int best = -1;
  double best_d = 1e18;
  for (int i = 0; i < int(s.objects.size()); ++i) {
    const WorldObject& o = s.objects[i];
    if (!o.graspable || o.fixed || o.in_flight) continue;
    double gap = tip.z - o.top_z();
    if (gap > cfg.grasp_window || gap < -cfg.grasp_sink) continue;
    if (!footprint_of(o.shape, o.pose).contains(tip.x, tip.y)) continue;
    double d = distance(tip, o.pose.position);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best < 0) return;
  WorldObject& o = s.objects[best];
  s.ee.attached = o.id;
  s.ee.grasp_offset = compose(s.ee.pose.inverse(), o.pose);
  s.supporter[best] = kSupportNone;
  o.velocity = {};
  emit(s, {Event::Type::grasp, "ee", o.id, 0, -1});
}

void release_object(WorldState& s, std::vector<char>& moved) {
  int i = attached_index(s);
  if (i < 0) {
    s.ee.attached.clear();
    return;
  }
  WorldObject& o = s.objects[i];
  Vec3 v = ee_velocity(s);
  s.ee.attached.clear();
  emit(s, {Event::Type::release, "ee", o.id, v.norm(), -1});
  if (v.norm() >= config().in_flight_min_speed) {
    o.in_flight = true;
    o.velocity = v;
    s.supporter[i] = kSupportNone;
  } else {
    moved[i] = 1;
  }
}

void flight_pass(WorldState& s, std::vector<char>& moved) {
  const Config& cfg = config();
  int att = attached_index(s);
  for (int i = 0; i < int(s.objects.size()); ++i) {
    WorldObject& o = s.objects[i];
    if (!o.in_flight) continue;
    double remaining = cfg.dt;
    const Vec3 g{0, 0, -cfg.gravity};
    while (remaining > 1e-12 && o.in_flight) {
      double speed = std::max(o.velocity.norm(), 1e-9);
      double h = std::min(remaining, 0.01 / speed);
      // exact ground-crossing time inside this substep (kinematics are exact
      // under the trapezoidal update below, so sub-step timing is too)
      double half = world_half_height(o.shape, o.pose.orientation);
      double c0 = o.pose.position.z - half;
      double vz = o.velocity.z;
      double disc = vz * vz + 2 * cfg.gravity * std::max(c0, 0.0);
      double t_table = (vz + std::sqrt(std::max(disc, 0.0))) / cfg.gravity;
      bool lands_now = c0 <= 1e-9 && vz <= 0;
      bool crosses = !lands_now && t_table > 0 && t_table <= h;
      double adv = crosses ? t_table : h;
      if (!lands_now) {
        o.pose.position += o.velocity * adv + g * (0.5 * adv * adv);
        o.velocity += g * adv;
        remaining -= adv;
      }
      // object contacts end the flight and may topple the target
      bool stopped = false;
      for (int j = 0; j < int(s.objects.size()) && !stopped; ++j) {
        if (j == i || j == att || s.objects[j].in_flight) continue;
        WorldObject& tgt = s.objects[j];
        double reach = o.shape.bounding_radius() + tgt.shape.bounding_radius();
        if (distance(o.pose.position, tgt.pose.position) > reach) continue;
        auto c = collide(o.shape, o.pose, tgt.shape, tgt.pose);
        if (!c) continue;
        double vrel = o.velocity.norm();
        emit(s, {Event::Type::hit, o.id, tgt.id, vrel, -1});
        emit(s, {Event::Type::contact, o.id, tgt.id, vrel, -1});
        if (can_topple(tgt) && vrel >= cfg.topple_hit_speed)
          topple_object(s, j, o.velocity.horizontal(), moved);
        stopped = true;
      }
      if (stopped || crosses || lands_now) {
        if (!stopped) emit(s, {Event::Type::contact, o.id, kTableId, o.velocity.norm(), -1});
        o.in_flight = false;
        o.velocity = {};
        moved[i] = 1;
      }
    }
  }
}

void update_goals(WorldState& s) {
  for (size_t k = 0; k < s.goals.size(); ++k) {
    TraceGoal& gl = s.goals[k];
    if (gl.status != TraceGoal::Status::active) continue;
    if (distance(s.ee.pose.position, gl.position) <= gl.radius) {
      gl.status = TraceGoal::Status::done;
      emit(s, {Event::Type::goal_touched, "", "", 0, int(k)});
      for (size_t n = k + 1; n < s.goals.size(); ++n) {
        if (s.goals[n].status == TraceGoal::Status::pending) {
          s.goals[n].status = TraceGoal::Status::active;
          break;
        }
      }
    }
    break;  // only one goal active at a time
  }
}

void refresh_toppled_flags(WorldState& s) {
  for (auto& o : s.objects) {
    if (o.shape.kind == ShapeKind::sphere) continue;
    o.toppled = vertical_axis_deviation(o) > config().topple_deviation;
  }
}

}  // namespace

bool Action::finite() const {
  for (double v : as_array())
    if (!std::isfinite(v)) return false;
  return true;
}

int WorldState::find(const std::string& id) const {
  for (size_t i = 0; i < objects.size(); ++i)
    if (objects[i].id == id) return int(i);
  return -1;
}

const WorldObject& WorldState::obj(const std::string& id) const {
  int i = find(id);
  if (i < 0) fail(Errc::not_found, "no such object: " + id);
  return objects[i];
}

WorldObject& WorldState::obj(const std::string& id) {
  int i = find(id);
  if (i < 0) fail(Errc::not_found, "no such object: " + id);
  return objects[i];
}

bool WorldState::has_event(Event::Type t, const std::string& a, const std::string& b) const {
  for (const auto& e : events) {
    if (e.type != t) continue;
    if (!a.empty() && e.a != a && e.b != a) continue;
    if (!b.empty() && e.a != b && e.b != b) continue;
    return true;
  }
  return false;
}

double resting_z(const Shape& s, const Quat& q, double support_top) {
  return support_top + world_half_height(s, q);
}

Shape ee_shape() { return Shape::sphere(config().ee_radius); }

Pose ee_pose(const WorldState& s) { return s.ee.pose; }

bool ee_touching(const WorldState& s, int i) {
  const WorldObject& o = s.objects[i];
  return collide(ee_shape(), ee_pose(s), o.shape, o.pose).has_value();
}

double vertical_axis_deviation(const WorldObject& o) {
  Vec3 up = o.pose.orientation.rotate({0, 0, 1});
  return std::acos(std::clamp(up.z, -1.0, 1.0));
}

Vec3 ee_velocity(const WorldState& s) {
  const auto& w = s.ee.window;
  if (w.size() < 2) return {};
  double duration = double(w.size() - 1) * config().dt;
  return (w.back().position - w.front().position) * (1.0 / duration);
}

bool supported_by(const WorldState& s, int i, int root) {
  int cur = i;
  for (int guard = 0; guard < 64; ++guard) {
    int sup = s.supporter.empty() ? kSupportNone : s.supporter[cur];
    if (sup == root) return true;
    if (sup < 0) return false;
    cur = sup;
  }
  return false;
}

int probe_supporter(const WorldState& s, int i) {
  const Config& cfg = config();
  const WorldObject& o = s.objects[i];
  double bottom = o.bottom_z();
  if (std::abs(bottom) <= 1e-6) return kSupportTable;
  for (int j = 0; j < int(s.objects.size()); ++j) {
    if (j == i) continue;
    const WorldObject& b = s.objects[j];
    if (b.in_flight) continue;
    if (std::abs(b.top_z() - bottom) > 1e-6) continue;
    if (footprint_overlap(o.shape, o.pose, b.shape, b.pose) >= cfg.support_min_overlap) return j;
  }
  return kSupportNone;
}

double scale_tilt(const WorldState& s) {
  if (!s.scale) return 0;
  const Config& cfg = config();
  int li = s.find(s.scale->left_pan);
  int ri = s.find(s.scale->right_pan);
  if (li < 0 || ri < 0) return 0;
  int att = attached_index(s);
  double lm = 0, rm = 0;
  for (int i = 0; i < int(s.objects.size()); ++i) {
    if (i == li || i == ri || i == att) continue;
    if (s.objects[i].in_flight) continue;
    if (supported_by(s, i, li)) lm += s.objects[i].mass;
    else if (supported_by(s, i, ri)) rm += s.objects[i].mass;
  }
  double t = cfg.scale_k_tilt * (rm - lm) * s.scale->arm_length;
  return clampd(t, -cfg.scale_max_tilt, cfg.scale_max_tilt);
}

bool scale_balanced(const WorldState& s) {
  return s.scale && std::abs(scale_tilt(s)) <= config().balance_tilt_tol;
}

double mass_of(const Shape& s) { return 1000.0 * s.volume(); }

void settle(WorldState& s) {
  if (s.supporter.size() != s.objects.size()) s.supporter.assign(s.objects.size(), kSupportNone);
  std::vector<char> moved(s.objects.size(), 1);
  resettle(s, moved);
}

WorldState reset_world(const WorldState& initial) {
  WorldState s = initial;
  s.events.clear();
  s.step_count = 0;
  if (s.supporter.size() != s.objects.size()) s.supporter.assign(s.objects.size(), kSupportNone);
  for (const auto& o : s.objects) {
    if (!o.shape.valid()) fail(Errc::invalid_arg, "invalid shape on object " + o.id);
  }
  int att = attached_index(s);
  for (int i = 0; i < int(s.objects.size()); ++i) {
    for (int j = i + 1; j < int(s.objects.size()); ++j) {
      if (i == att || j == att) continue;
      auto c = collide(s.objects[i].shape, s.objects[i].pose, s.objects[j].shape,
                       s.objects[j].pose);
      if (c && c->depth > config().penetration_tol)
        fail(Errc::invalid_arg, "overlapping initial objects: " + s.objects[i].id + " and " +
                                    s.objects[j].id);
    }
  }
  settle(s);
  s.ee.window.clear();
  s.ee.window.push_back(s.ee.pose);
  bool has_active = false;
  for (auto& g : s.goals)
    if (g.status == TraceGoal::Status::active) has_active = true;
  if (!has_active)
    for (auto& g : s.goals)
      if (g.status == TraceGoal::Status::pending) {
        g.status = TraceGoal::Status::active;
        break;
      }
  if (s.scale) s.scale->tilt = scale_tilt(s);
  refresh_toppled_flags(s);
  return s;
}

WorldState step(const WorldState& state, const Action& action_in) {
  if (!action_in.finite()) fail(Errc::invalid_arg, "non-finite action");
  const Config& cfg = config();
  const Action a = clamp_action(action_in);

  WorldState s = state;
  s.events.clear();
  s.step_count += 1;
  if (s.supporter.size() != s.objects.size()) s.supporter.assign(s.objects.size(), kSupportNone);

  // end-effector integration, clipped to the workspace
  Vec3 p = s.ee.pose.position + a.translation;
  p.x = clampd(p.x, cfg.workspace_min_xy, cfg.workspace_max_xy);
  p.y = clampd(p.y, cfg.workspace_min_xy, cfg.workspace_max_xy);
  p.z = clampd(p.z, cfg.workspace_min_z, cfg.workspace_max_z);
  Quat q = Quat::from_rpy(a.rotation.x, a.rotation.y, a.rotation.z) * s.ee.pose.orientation;
  s.ee.pose = {p, q};
  s.ee.window.push_back(s.ee.pose);
  while (int(s.ee.window.size()) > cfg.velocity_window) s.ee.window.erase(s.ee.window.begin());

  std::vector<char> moved(s.objects.size(), 0);

  int att = attached_index(s);
  if (att >= 0) {
    s.objects[att].pose = compose(s.ee.pose, s.ee.grasp_offset);
    s.supporter[att] = kSupportNone;
    moved[att] = 1;
  }

  contact_push_pass(s, moved);

  if (a.grip > 0) {
    s.ee.suction_on = true;
    if (s.ee.attached.empty()) try_attach(s);
  } else {
    s.ee.suction_on = false;
    if (!s.ee.attached.empty()) release_object(s, moved);
  }

  flight_pass(s, moved);

  resettle(s, moved);
  for (int pass = 0; pass < 4; ++pass) {
    if (!resolve_penetrations_once(s, moved)) break;
    resettle(s, moved);
  }

  update_goals(s);
  if (s.scale) s.scale->tilt = scale_tilt(s);
  refresh_toppled_flags(s);
  return s;
}

}  // namespace dsk
