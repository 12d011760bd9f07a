#include "core/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "core/catalog.hpp"
#include "core/config.hpp"
#include "core/env.hpp"
#include "core/error.hpp"
#include "core/render.hpp"
#include "core/solvers.hpp"

namespace dsk {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::vector<std::string>& language_skip_list() {
  static const std::vector<std::string> skip = {
      "match_pose",   "move_without_hitting", "follow_order",
      "follow_order_restore", "rearrange",    "rearrange_restore"};
  return skip;
}

bool language_skipped(const std::string& name) {
  const auto& skip = language_skip_list();
  return std::find(skip.begin(), skip.end(), name) != skip.end();
}

// ---------------------------------------------------------------------------
// scene sampling helpers

struct Build {
  WorldState world;
  Predicate tree;
  std::vector<PromptSegment> prompt;
  std::vector<PromptSegment> prompt_language;
  std::map<std::string, std::string> descriptions;
  std::vector<std::pair<std::string, WorldState>> static_keysteps;
  int oracle_keysteps = 0;
  std::map<std::string, Image> type_images;
};

struct Sampler {
  Rng rng;
  Split split;
  WorldState& world;
  std::map<std::string, std::string>& desc;
  std::vector<std::string> obj_pool, tex_pool, tex_bag;
  std::map<std::string, int> counters;

  Sampler(uint64_t seed, Split split_, Build& b)
      : rng(seed), split(split_), world(b.world), desc(b.descriptions) {
    const CatalogSplit& cs = default_split();
    obj_pool = split == Split::test_objects ? cs.test_objects : cs.train_objects;
    tex_pool = split == Split::test_textures ? cs.test_textures : cs.train_textures;
    tex_bag = tex_pool;
    rng.shuffle(tex_bag);
    world.ee.pose = {{rng.uniform(-0.12, 0.12), rng.uniform(-0.15, 0.1), 0.28},
                     Quat::identity()};
  }

  std::string take_texture() {
    if (tex_bag.empty()) {
      tex_bag = tex_pool;
      rng.shuffle(tex_bag);
    }
    std::string t = tex_bag.back();
    tex_bag.pop_back();
    return t;
  }

  const ObjectTemplate& pick_template(const std::function<bool(const ObjectTemplate&)>& pred) {
    std::vector<const ObjectTemplate*> cands;
    for (const auto& name : obj_pool) {
      const ObjectTemplate& t = catalog().object(name);
      if (pred(t)) cands.push_back(&t);
    }
    if (cands.empty()) {
      for (const auto& name : obj_pool) cands.push_back(&catalog().object(name));
    }
    return *cands[size_t(rng.uniform_int(0, int64_t(cands.size()) - 1))];
  }

  const ObjectTemplate& any_template() {
    return pick_template([](const ObjectTemplate&) { return true; });
  }
  const ObjectTemplate& boxy_template() {
    return pick_template([](const ObjectTemplate& t) { return t.shape == ShapeKind::box; });
  }
  const ObjectTemplate& nonsphere_template() {
    return pick_template([](const ObjectTemplate& t) { return t.shape != ShapeKind::sphere; });
  }

  WorldObject make(const ObjectTemplate& tmpl, const std::string& texture) {
    WorldObject o;
    o.id = tmpl.name + "_" + std::to_string(counters[tmpl.name]++);
    o.shape = tmpl.sample(rng);
    o.texture = texture;
    o.mass = mass_of(o.shape);
    desc[o.id] = catalog().texture(texture).display + " " + tmpl.display;
    return o;
  }

  WorldObject make_fixture(const std::string& name, const std::string& texture) {
    const ObjectTemplate& tmpl = catalog().fixture(name);
    WorldObject o;
    o.id = tmpl.name + "_" + std::to_string(counters[tmpl.name]++);
    o.shape = tmpl.sample(rng);
    o.texture = texture;
    o.mass = mass_of(o.shape);
    o.fixed = true;
    o.graspable = false;
    o.container = tmpl.container;
    desc[o.id] = catalog().texture(texture).display + " " + tmpl.display;
    return o;
  }

  bool spot_free(double x, double y, double extent, double margin) const {
    for (const auto& o : world.objects) {
      if (o.id == world.ee.attached) continue;
      double need = extent + xy_reach(o.shape) + margin;
      if (std::hypot(o.pose.position.x - x, o.pose.position.y - y) < need) return false;
    }
    return true;
  }

  static double xy_reach(const Shape& s) {
    switch (s.kind) {
      case ShapeKind::box: return std::hypot(s.hx, s.hy);
      case ShapeKind::disc:
      case ShapeKind::sphere: return s.r;
    }
    return 0;
  }

  void put(WorldObject& o, double x, double y, double yaw) {
    Quat q = Quat::from_rpy(0, 0, yaw);
    o.pose = {{x, y, resting_z(o.shape, q, 0.0)}, q};
    world.objects.push_back(o);
  }

  // rejection placement inside the spawn box
  void place_random(WorldObject& o, double margin = 0.015, double lo = 0.0, double hi = 0.0) {
    const Config& cfg = config();
    if (lo == 0.0 && hi == 0.0) {
      lo = cfg.spawn_min_xy;
      hi = cfg.spawn_max_xy;
    }
    double ext = xy_reach(o.shape);
    for (int k = 0; k < cfg.sampler_max_retries; ++k) {
      double x = rng.uniform(lo + ext, hi - ext);
      double y = rng.uniform(lo + ext, hi - ext);
      if (!spot_free(x, y, ext, margin)) continue;
      put(o, x, y, rng.uniform(-kPi, kPi));
      return;
    }
    fail(Errc::sampler, "could not place " + o.id + " after retries");
  }

  Vec3 free_point(double clearance, double lo, double hi) {
    const Config& cfg = config();
    for (int k = 0; k < cfg.sampler_max_retries; ++k) {
      double x = rng.uniform(lo, hi);
      double y = rng.uniform(lo, hi);
      if (spot_free(x, y, clearance, 0.0)) return {x, y, 0};
    }
    fail(Errc::sampler, "no free point");
  }

  // base plates must dominate the top object's footprint
  static void widen_base(WorldObject& base, const WorldObject& top) {
    double need = xy_reach(top.shape) * 1.15;
    if (base.shape.kind == ShapeKind::box) {
      double cur = std::min(base.shape.hx, base.shape.hy);
      if (cur < need) {
        double f = need / cur;
        base.shape.hx *= f;
        base.shape.hy *= f;
      }
    } else if (base.shape.kind == ShapeKind::disc) {
      base.shape.r = std::max(base.shape.r, need);
    }
    base.mass = mass_of(base.shape);
  }

  // distinguish same-looking objects that differ only in size
  void finish_descriptions() {
    for (size_t i = 0; i < world.objects.size(); ++i) {
      for (size_t j = i + 1; j < world.objects.size(); ++j) {
        WorldObject& a = world.objects[i];
        WorldObject& b = world.objects[j];
        std::string da = desc[a.id], db = desc[b.id];
        if (da != db) continue;
        bool a_big = a.shape.volume() >= b.shape.volume();
        desc[a.id] = (a_big ? "large " : "small ") + da;
        desc[b.id] = (a_big ? "small " : "large ") + db;
      }
    }
    for (const auto& t : catalog().textures) desc[t.name] = t.display;
  }
};

void T(Build& b, const std::string& text) { b.prompt.push_back({PromptSegment::Type::text, text, "", -1}); }
void OBJ(Build& b, const std::string& id) { b.prompt.push_back({PromptSegment::Type::obj_image, "", id, -1}); }
void TEX(Build& b, const std::string& tex) { b.prompt.push_back({PromptSegment::Type::tex_image, "", tex, -1}); }
void KS(Build& b, const std::string& ref) { b.prompt.push_back({PromptSegment::Type::keystep, "", ref, -1}); }
void SCENE(Build& b, const std::string& ref) { b.prompt.push_back({PromptSegment::Type::scene_image, "", ref, -1}); }

void attach_to_ee(WorldState& w, WorldObject obj) {
  double half = world_half_height(obj.shape, Quat::identity());
  Pose offset{{0, 0, -(half + 0.008)}, Quat::identity()};
  obj.pose = compose(w.ee.pose, offset);
  w.objects.push_back(obj);
  w.ee.attached = obj.id;
  w.ee.suction_on = true;
  w.ee.grasp_offset = offset;
}

std::string dir_name(int dx, int dy) {
  if (dy > 0) return "north";
  if (dy < 0) return "south";
  if (dx > 0) return "east";
  return "west";
}

double pick_angle(Rng& rng) {
  static const double menu[5] = {30, 60, 90, 120, 150};
  return menu[rng.uniform_int(0, 4)];
}

const char* dir_word(int direction) { return direction > 0 ? "anti-clockwise" : "clockwise"; }

// ---------------------------------------------------------------------------
// L0 builders

Build build_match_pose(Sampler& S) {
  Build b;
  // a couple of scene objects for visual context
  int n = int(S.rng.uniform_int(1, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject o = S.make(S.any_template(), S.take_texture());
    S.place_random(o);
  }
  int k = int(S.rng.uniform_int(1, 3));
  std::vector<Predicate> steps;
  for (int i = 0; i < k; ++i) {
    Pose g{{S.rng.uniform(-0.35, 0.35), S.rng.uniform(-0.35, 0.35), S.rng.uniform(0.18, 0.45)},
           Quat::from_rpy(0, 0, S.rng.uniform(-kPi, kPi))};
    steps.push_back(pred_ee_at_pose(g, config().pose_tolerance));
    WorldState shadow = S.world;
    shadow.ee.pose = g;
    b.static_keysteps.push_back({"ks" + std::to_string(i), shadow});
  }
  b.tree = pred_sequence(std::move(steps));
  T(b, "Match the pose of the end effector in ");
  for (int i = 0; i < k; ++i) {
    if (i == k - 1 && k > 1) T(b, " followed by ");
    else if (i > 0) T(b, ", ");
    KS(b, "ks" + std::to_string(i));
  }
  T(b, ".");
  return b;
}

Build build_move_without_hitting(Sampler& S) {
  Build b;
  Vec3 start = S.world.ee.pose.position;
  Pose goal{{S.rng.uniform(-0.35, 0.35), S.rng.uniform(-0.35, 0.35), S.rng.uniform(0.2, 0.45)},
            Quat::from_rpy(0, 0, S.rng.uniform(-kPi, kPi))};
  while (distance(goal.position, start) < 0.4) {
    goal.position = {S.rng.uniform(-0.35, 0.35), S.rng.uniform(-0.35, 0.35),
                     S.rng.uniform(0.2, 0.45)};
  }
  int n = int(S.rng.uniform_int(1, 5));
  std::vector<std::string> obstacle_ids;
  for (int i = 0; i < n; ++i) {
    bool ball = S.rng.chance(0.5);
    WorldObject o;
    o.id = "obstacle_" + std::to_string(i);
    o.shape = ball ? Shape::sphere(S.rng.uniform(0.03, 0.05))
                   : Shape::box(S.rng.uniform(0.025, 0.045), S.rng.uniform(0.025, 0.045),
                                S.rng.uniform(0.025, 0.045));
    o.texture = S.take_texture();
    o.mass = mass_of(o.shape);
    o.fixed = true;
    o.graspable = false;
    S.desc[o.id] = catalog().texture(o.texture).display + " obstacle";
    // suspended near the straight line between start and goal
    for (int k = 0; k < config().sampler_max_retries; ++k) {
      double t = S.rng.uniform(0.25, 0.75);
      Vec3 p = start + (goal.position - start) * t;
      p.x += S.rng.uniform(-0.1, 0.1);
      p.y += S.rng.uniform(-0.1, 0.1);
      p.z += S.rng.uniform(-0.08, 0.08);
      p.z = std::clamp(p.z, 0.12, 0.55);
      double clear = o.shape.bounding_radius() + 0.085;
      if (distance(p, start) < clear || distance(p, goal.position) < clear) continue;
      bool ok = true;
      for (const auto& other : S.world.objects)
        if (distance(p, other.pose.position) <
            o.shape.bounding_radius() + other.shape.bounding_radius() + 0.02)
          ok = false;
      if (!ok) continue;
      o.pose = {p, Quat::identity()};
      break;
    }
    S.world.objects.push_back(o);
    obstacle_ids.push_back(o.id);
  }
  WorldState shadow = S.world;
  shadow.ee.pose = goal;
  b.static_keysteps.push_back({"ks0", shadow});
  b.tree = pred_set({pred_ee_at_pose(goal, config().pose_tolerance),
                     pred_not_touching(obstacle_ids)});
  T(b, "Match the pose of the end effector in ");
  KS(b, "ks0");
  T(b, " without hitting any objects.");
  return b;
}

Build build_pick(Sampler& S) {
  Build b;
  WorldObject target = S.make(S.any_template(), S.take_texture());
  S.place_random(target);
  std::string tid = target.id, ttex = target.texture;
  int n = int(S.rng.uniform_int(0, 3));
  for (int i = 0; i < n; ++i) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  b.tree = pred_picked(tid);
  int variant = int(S.rng.uniform_int(0, 5));
  const char* verb = variant % 3 == 0 ? "Pick up" : variant % 3 == 1 ? "Grab" : "Lift";
  if (variant < 3) {
    T(b, std::string(verb) + " the ");
    OBJ(b, tid);
    T(b, ".");
  } else {
    T(b, std::string(verb) + " the object with ");
    TEX(b, ttex);
    T(b, " texture.");
  }
  return b;
}

Build build_place(Sampler& S) {
  Build b;
  WorldObject held = S.make(S.any_template(), S.take_texture());
  WorldObject base = S.make(S.nonsphere_template(), S.take_texture());
  Sampler::widen_base(base, held);
  S.place_random(base);
  attach_to_ee(S.world, held);
  int n = int(S.rng.uniform_int(0, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  b.tree = pred_on_top(held.id, {base.id});
  if (S.rng.chance(0.5)) {
    T(b, "Put ");
    OBJ(b, held.id);
    T(b, " on ");
    OBJ(b, base.id);
    T(b, ".");
  } else {
    T(b, "Put object with ");
    TEX(b, held.texture);
    T(b, " texture on object with ");
    TEX(b, base.texture);
    T(b, " texture.");
  }
  return b;
}

Build build_push(Sampler& S) {
  Build b;
  WorldObject obj = S.make(S.nonsphere_template(), S.take_texture());
  WorldObject goal = S.make(S.any_template(), S.take_texture());
  S.place_random(obj);
  // goal object at a pushable distance
  const Config& cfg = config();
  double ext = Sampler::xy_reach(goal.shape);
  for (int k = 0; k < cfg.sampler_max_retries; ++k) {
    double ang = S.rng.uniform(-kPi, kPi);
    double d = S.rng.uniform(0.25, 0.42);
    double x = obj.pose.position.x + std::cos(ang) * d;
    double y = obj.pose.position.y + std::sin(ang) * d;
    if (x < cfg.spawn_min_xy + ext || x > cfg.spawn_max_xy - ext || y < cfg.spawn_min_xy + ext ||
        y > cfg.spawn_max_xy - ext)
      continue;
    if (!S.spot_free(x, y, ext, 0.02)) continue;
    S.put(goal, x, y, S.rng.uniform(-kPi, kPi));
    break;
  }
  if (S.world.find(goal.id) < 0) fail(Errc::sampler, "no room for the push goal");
  b.tree = pred_push_progress(obj.id, goal.id);
  if (S.rng.chance(0.5)) {
    T(b, "Push ");
    OBJ(b, obj.id);
    T(b, " towards ");
    OBJ(b, goal.id);
    T(b, ".");
  } else {
    T(b, "Push object with ");
    TEX(b, obj.texture);
    T(b, " texture towards object with ");
    TEX(b, goal.texture);
    T(b, " texture.");
  }
  return b;
}

Build build_rotate(Sampler& S) {
  Build b;
  WorldObject obj = S.make(S.boxy_template(), S.take_texture());
  S.place_random(obj);
  int n = int(S.rng.uniform_int(1, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  double angle = pick_angle(S.rng);
  int dir = S.rng.chance(0.5) ? 1 : -1;
  b.tree = pred_rotated_by(obj.id, angle, dir);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", angle);
  if (S.rng.chance(0.5)) {
    T(b, "Rotate ");
    OBJ(b, obj.id);
    T(b, std::string(" ") + buf + " degrees " + dir_word(dir) + ".");
  } else {
    T(b, "Rotate object with ");
    TEX(b, obj.texture);
    T(b, std::string(" texture ") + buf + " degrees " + dir_word(dir) + ".");
  }
  return b;
}

Build build_throw(Sampler& S, bool topple) {
  Build b;
  WorldObject missile = S.make(S.any_template(), S.take_texture());
  WorldObject target = S.make(S.nonsphere_template(), S.take_texture());
  if (topple) {
    // a tall target tips over convincingly
    if (target.shape.kind == ShapeKind::box) {
      target.shape.hz = std::max(target.shape.hz, std::hypot(target.shape.hx, target.shape.hy) * 1.4);
    } else if (target.shape.kind == ShapeKind::disc) {
      target.shape.h = std::max(target.shape.h, target.shape.r * 3.0);
    }
    target.mass = mass_of(target.shape);
  }
  S.place_random(target, 0.05);
  attach_to_ee(S.world, missile);
  b.tree = pred_once(pred_hit(missile.id, target.id, topple));
  bool v1 = S.rng.chance(0.5);
  if (v1) {
    T(b, "Throw ");
    OBJ(b, missile.id);
    T(b, " to ");
    OBJ(b, target.id);
  } else {
    T(b, "Hit ");
    OBJ(b, target.id);
    T(b, " with ");
    OBJ(b, missile.id);
  }
  if (topple) {
    T(b, " such that ");
    OBJ(b, target.id);
    T(b, " falls over.");
  } else {
    T(b, ".");
  }
  return b;
}

Build build_touch(Sampler& S, TouchMode mode) {
  Build b;
  WorldObject obj = S.make(S.nonsphere_template(), S.take_texture());
  if (mode == TouchMode::topple) {
    if (obj.shape.kind == ShapeKind::box)
      obj.shape.hz = std::max(obj.shape.hz, std::hypot(obj.shape.hx, obj.shape.hy) * 1.4);
    else if (obj.shape.kind == ShapeKind::disc)
      obj.shape.h = std::max(obj.shape.h, obj.shape.r * 3.0);
    obj.mass = mass_of(obj.shape);
  }
  S.place_random(obj, 0.05);
  int n = int(S.rng.uniform_int(1, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  switch (mode) {
    case TouchMode::gentle:
      b.tree = pred_touched_gently(obj.id);
      T(b, "Touch ");
      break;
    case TouchMode::push:
      b.tree = pred_touch_pushed(obj.id);
      T(b, "Touch and push ");
      break;
    case TouchMode::topple:
      b.tree = pred_touch(obj.id, TouchMode::topple);
      T(b, "Touch and topple ");
      break;
  }
  OBJ(b, obj.id);
  T(b, ".");
  return b;
}

Build build_trace(Sampler& S) {
  Build b;
  int k = int(S.rng.uniform_int(2, 5));
  Vec3 prev = S.world.ee.pose.position;
  for (int i = 0; i < k; ++i) {
    TraceGoal g;
    g.radius = 0.03;
    bool found = false;
    for (int t = 0; t < config().sampler_max_retries && !found; ++t) {
      double ang = S.rng.uniform(-kPi, kPi);
      double d = S.rng.uniform(0.16, 0.30);
      Vec3 c{prev.x + std::cos(ang) * d, prev.y + std::sin(ang) * d,
             std::clamp(prev.z + S.rng.uniform(-0.12, 0.12), 0.15, 0.45)};
      if (std::abs(c.x) > 0.42 || std::abs(c.y) > 0.42) continue;
      bool ok = true;
      for (const auto& other : S.world.goals)
        if (distance(c, other.position) < 0.1) ok = false;
      if (!ok) continue;
      g.position = c;
      found = true;
    }
    if (!found) fail(Errc::sampler, "trace goal placement failed");
    S.world.goals.push_back(g);
    prev = g.position;
  }
  b.tree = pred_trace_goals();
  T(b, "Trace the sequence of goals by moving to the next green goal.");
  return b;
}

// ---------------------------------------------------------------------------
// L1 builders

Build build_simple_manipulation(Sampler& S) {
  Build b;
  WorldObject top = S.make(S.any_template(), S.take_texture());
  WorldObject base = S.make(S.nonsphere_template(), S.take_texture());
  Sampler::widen_base(base, top);
  S.place_random(top);
  S.place_random(base);
  int n = int(S.rng.uniform_int(1, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  b.tree = pred_on_top(top.id, {base.id});
  if (S.rng.chance(0.5)) {
    T(b, "Put ");
    OBJ(b, top.id);
    T(b, " on ");
    OBJ(b, base.id);
    T(b, ".");
  } else {
    T(b, "Put object with ");
    TEX(b, top.texture);
    T(b, " texture on object with ");
    TEX(b, base.texture);
    T(b, " texture.");
  }
  return b;
}

Build build_follow_order(Sampler& S, bool restore) {
  Build b;
  WorldObject obj = S.make(S.any_template(), S.take_texture());
  S.place_random(obj);
  int n = int(S.rng.uniform_int(1, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  Pose initial = S.world.objects[S.world.find(obj.id)].pose;
  int k = int(S.rng.uniform_int(2, 3));
  std::vector<Predicate> steps;
  double ext = Sampler::xy_reach(obj.shape);
  for (int i = 0; i < k; ++i) {
    Vec3 p = S.free_point(ext + 0.04, config().spawn_min_xy + 0.06, config().spawn_max_xy - 0.06);
    Quat q = Quat::from_rpy(0, 0, S.rng.uniform(-kPi, kPi));
    p.z = resting_z(obj.shape, q, 0.0);
    steps.push_back(pred_at_pose(obj.id, {p, q}, config().pose_tolerance));
  }
  if (restore) steps.push_back(pred_at_pose(obj.id, initial, config().pose_tolerance));
  b.tree = pred_sequence(std::move(steps));
  b.oracle_keysteps = k;
  T(b, "Follow the motion for ");
  OBJ(b, obj.id);
  T(b, ": ");
  for (int i = 0; i < k; ++i) {
    if (i) T(b, " ");
    KS(b, "ks" + std::to_string(i));
  }
  T(b, restore ? " and then restore." : ".");
  return b;
}

Build build_neighbour(Sampler& S) {
  Build b;
  const Config& cfg = config();
  // grid occupants
  std::vector<std::pair<int, int>> cells;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy) cells.push_back({dx, dy});
  S.rng.shuffle(cells);
  int n = int(S.rng.uniform_int(4, 6));
  cells.resize(n);
  std::vector<std::string> ids;
  for (auto [dx, dy] : cells) {
    const ObjectTemplate& tmpl = S.pick_template(
        [](const ObjectTemplate& t) { return t.shape != ShapeKind::sphere; });
    WorldObject o = S.make(tmpl, S.take_texture());
    // keep grid objects small enough for the tray
    double cap = 0.02;
    if (o.shape.kind == ShapeKind::box) {
      double f = std::min(1.0, cap / std::max({o.shape.hx, o.shape.hy, o.shape.hz}));
      o.shape.hx *= f;
      o.shape.hy *= f;
      o.shape.hz *= f;
    } else if (o.shape.kind == ShapeKind::disc) {
      double f = std::min(1.0, cap / std::max(o.shape.r, o.shape.h * 0.5));
      o.shape.r *= f;
      o.shape.h *= f;
    }
    o.mass = mass_of(o.shape);
    S.put(o, dx * cfg.grid_spacing, dy * cfg.grid_spacing, 0.0);
    ids.push_back(o.id);
  }
  // pick an anchor with at least one occupied neighbour
  std::vector<int> order(cells.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  S.rng.shuffle(order);
  int anchor = -1, mate = -1;
  int adx = 0, ady = 0;
  for (int i : order) {
    std::vector<std::pair<int, int>> dirs = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    S.rng.shuffle(dirs);
    for (auto [dx, dy] : dirs) {
      for (size_t j = 0; j < cells.size(); ++j) {
        if (cells[j].first == cells[i].first + dx && cells[j].second == cells[i].second + dy) {
          anchor = i;
          mate = int(j);
          adx = dx;
          ady = dy;
          break;
        }
      }
      if (anchor >= 0) break;
    }
    if (anchor >= 0) break;
  }
  if (anchor < 0) fail(Errc::sampler, "no neighbouring pair on the grid");

  WorldObject tray = S.make_fixture("tray", S.take_texture());
  if (tray.shape.hx < 0.06) {
    double f = 0.06 / tray.shape.hx;
    tray.shape.hx *= f;
    tray.shape.hy *= f;
  }
  double tx = S.rng.chance(0.5) ? 0.34 : -0.34;
  S.put(tray, tx, S.rng.uniform(-0.3, 0.3), 0.0);

  b.tree = pred_sequence({pred_inside(ids[anchor], {tray.id}),
                          pred_inside(ids[mate], {tray.id})});
  T(b, "First put ");
  OBJ(b, ids[anchor]);
  T(b, " in ");
  OBJ(b, tray.id);
  T(b, " and then put the object that was at its " + dir_name(adx, ady) + " in the same ");
  OBJ(b, tray.id);
  T(b, ".");
  return b;
}

void scale_shape(Shape& s, double fz, double fxy) {
  if (s.kind == ShapeKind::box) {
    s.hx *= fxy;
    s.hy *= fxy;
    s.hz *= fz;
  } else if (s.kind == ShapeKind::disc) {
    s.r *= fxy;
    s.h *= fz;
  } else {
    s.r *= std::max(fz, fxy);
  }
}

void clamp_xy_extent(Shape& s, double max_ext) {
  double ext = Sampler::xy_reach(s);
  if (ext > max_ext) {
    double f = max_ext / ext;
    scale_shape(s, std::max(f, 0.5), f);
  }
}

Build build_novel_adjective(Sampler& S) {
  Build b;
  NovelBinding adj = novel_word_binding(true, S.rng);
  bool about_height = adj.meaning == "taller" || adj.meaning == "shorter";
  bool positive = adj.meaning == "taller" || adj.meaning == "larger";

  auto make_pair = [&](const ObjectTemplate& tmpl, const std::string& tex_a,
                       const std::string& tex_b, WorldObject& plus, WorldObject& minus) {
    Shape base_shape = tmpl.sample(S.rng);
    plus = S.make(tmpl, tex_a);
    minus = S.make(tmpl, tex_b);
    plus.shape = base_shape;
    minus.shape = base_shape;
    if (about_height) {
      scale_shape(plus.shape, 1.55, 1.0);
      scale_shape(minus.shape, 0.65, 1.0);
    } else {
      scale_shape(plus.shape, 1.35, 1.35);
      scale_shape(minus.shape, 0.7, 0.7);
    }
    plus.mass = mass_of(plus.shape);
    minus.mass = mass_of(minus.shape);
  };

  const ObjectTemplate& te = S.nonsphere_template();
  WorldObject ex_plus, ex_minus;
  make_pair(te, S.take_texture(), S.take_texture(), ex_plus, ex_minus);
  S.place_random(ex_plus);
  S.place_random(ex_minus);

  const ObjectTemplate& tc = S.pick_template([&](const ObjectTemplate& t) {
    return t.shape != ShapeKind::sphere && t.name != te.name;
  });
  std::string cand_tex = S.take_texture();
  WorldObject cand_plus, cand_minus;
  make_pair(tc, cand_tex, cand_tex, cand_plus, cand_minus);
  S.place_random(cand_plus);
  S.place_random(cand_minus);

  WorldObject goal = S.make(S.nonsphere_template(), S.take_texture());
  Sampler::widen_base(goal, cand_plus);
  S.place_random(goal);

  const std::string correct = positive ? cand_plus.id : cand_minus.id;
  b.tree = pred_on_top(correct, {goal.id});

  std::string type_key = "type:" + tc.name;
  b.type_images[type_key] = render_object_image(tc.nominal(), cand_tex);
  b.descriptions[type_key] = catalog().texture(cand_tex).display + " " + tc.display;

  const std::string& exA = positive ? ex_plus.id : ex_minus.id;
  const std::string& exB = positive ? ex_minus.id : ex_plus.id;
  OBJ(b, exA);
  T(b, " is " + adj.word + " than ");
  OBJ(b, exB);
  T(b, ". Put the " + adj.word + " ");
  OBJ(b, type_key);
  T(b, " on ");
  OBJ(b, goal.id);
  T(b, ".");
  return b;
}

Build build_novel_noun(Sampler& S) {
  Build b;
  NovelBinding n1 = novel_word_binding(false, S.rng);
  NovelBinding n2 = novel_word_binding(false, S.rng);
  while (n2.word == n1.word) n2 = novel_word_binding(false, S.rng);
  WorldObject top = S.make(S.any_template(), S.take_texture());
  WorldObject base = S.make(S.nonsphere_template(), S.take_texture());
  Sampler::widen_base(base, top);
  S.place_random(top);
  S.place_random(base);
  WorldObject d = S.make(S.any_template(), S.take_texture());
  S.place_random(d);
  b.tree = pred_on_top(top.id, {base.id});
  OBJ(b, top.id);
  T(b, " is " + n1.word + " and ");
  OBJ(b, base.id);
  T(b, " is " + n2.word + ". Put " + n1.word + " on " + n2.word + ".");
  return b;
}

Build build_novel_adj_noun(Sampler& S) {
  Build b;
  NovelBinding adj = novel_word_binding(true, S.rng);
  NovelBinding n1 = novel_word_binding(false, S.rng);
  NovelBinding n2 = novel_word_binding(false, S.rng);
  while (n2.word == n1.word) n2 = novel_word_binding(false, S.rng);
  bool about_height = adj.meaning == "taller" || adj.meaning == "shorter";
  bool positive = adj.meaning == "taller" || adj.meaning == "larger";

  // noun-1 candidates: same template and texture, two sizes
  const ObjectTemplate& tn = S.nonsphere_template();
  std::string tex = S.take_texture();
  Shape base_shape = tn.sample(S.rng);
  WorldObject cand_plus = S.make(tn, tex), cand_minus = S.make(tn, tex);
  cand_plus.shape = base_shape;
  cand_minus.shape = base_shape;
  scale_shape(cand_plus.shape, about_height ? 1.55 : 1.35, about_height ? 1.0 : 1.35);
  scale_shape(cand_minus.shape, about_height ? 0.65 : 0.7, about_height ? 1.0 : 0.7);
  cand_plus.mass = mass_of(cand_plus.shape);
  cand_minus.mass = mass_of(cand_minus.shape);
  S.place_random(cand_plus);
  S.place_random(cand_minus);

  WorldObject goal = S.make(S.nonsphere_template(), S.take_texture());
  Sampler::widen_base(goal, cand_plus);
  S.place_random(goal);

  // two grounding pairs for the adjective
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int p = 0; p < 2; ++p) {
    const ObjectTemplate& te = S.pick_template([&](const ObjectTemplate& t) {
      return t.shape != ShapeKind::sphere && t.name != tn.name;
    });
    Shape ex_shape = te.sample(S.rng);
    WorldObject ea = S.make(te, S.take_texture()), eb = S.make(te, S.take_texture());
    ea.shape = ex_shape;
    eb.shape = ex_shape;
    scale_shape(ea.shape, about_height ? 1.55 : 1.35, about_height ? 1.0 : 1.35);
    scale_shape(eb.shape, about_height ? 0.65 : 0.7, about_height ? 1.0 : 0.7);
    ea.mass = mass_of(ea.shape);
    eb.mass = mass_of(eb.shape);
    S.place_random(ea);
    S.place_random(eb);
    pairs.push_back({ea.id, eb.id});  // ea is the "+" exemplar
  }

  const std::string correct = positive ? cand_plus.id : cand_minus.id;
  b.tree = pred_on_top(correct, {goal.id});

  std::string type_key = "type:" + tn.name;
  b.type_images[type_key] = render_object_image(tn.nominal(), tex);
  b.descriptions[type_key] = catalog().texture(tex).display + " " + tn.display;

  T(b, "This is a " + n1.word + " ");
  OBJ(b, type_key);
  T(b, ". This is a " + n2.word + " ");
  OBJ(b, goal.id);
  T(b, ". ");
  for (int p = 0; p < 2; ++p) {
    const std::string& a = positive ? pairs[p].first : pairs[p].second;
    const std::string& bb = positive ? pairs[p].second : pairs[p].first;
    if (p) T(b, ", ");
    OBJ(b, a);
    T(b, " is " + adj.word + " than ");
    OBJ(b, bb);
  }
  T(b, ". Put the " + adj.word + " " + n1.word + " on " + n2.word + ".");
  return b;
}

Build build_rearrange(Sampler& S, bool restore) {
  Build b;
  int n = int(S.rng.uniform_int(3, 4));
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    WorldObject o = S.make(S.any_template(), S.take_texture());
    S.place_random(o, 0.03);
    ids.push_back(o.id);
  }
  // target layout: clear of every initial position and of other targets
  std::vector<Vec3> targets;
  for (const auto& id : ids) {
    const WorldObject& o = S.world.obj(id);
    double ext = Sampler::xy_reach(o.shape);
    Vec3 t;
    bool found = false;
    for (int k = 0; k < config().sampler_max_retries; ++k) {
      double x = S.rng.uniform(config().spawn_min_xy + ext, config().spawn_max_xy - ext);
      double y = S.rng.uniform(config().spawn_min_xy + ext, config().spawn_max_xy - ext);
      bool ok = S.spot_free(x, y, ext, 0.03);
      for (size_t j = 0; j < targets.size() && ok; ++j) {
        const WorldObject& other = S.world.obj(ids[j]);
        if (std::hypot(targets[j].x - x, targets[j].y - y) <
            ext + Sampler::xy_reach(other.shape) + 0.03)
          ok = false;
      }
      if (!ok) continue;
      t = {x, y, o.pose.position.z};
      found = true;
      break;
    }
    if (!found) fail(Errc::sampler, "rearrange target placement failed");
    targets.push_back(t);
  }
  std::vector<Predicate> to_target, back;
  WorldState shadow = S.world;
  for (int i = 0; i < n; ++i) {
    to_target.push_back(pred_at_pos(ids[i], targets[i], 0.05));
    back.push_back(pred_at_pos(ids[i], S.world.obj(ids[i]).pose.position, 0.05));
    shadow.obj(ids[i]).pose.position = targets[i];
  }
  b.static_keysteps.push_back({"scene", shadow});
  if (restore)
    b.tree = pred_sequence({pred_set(std::move(to_target)), pred_set(std::move(back))});
  else
    b.tree = pred_set(std::move(to_target));
  T(b, "Rearrange to ");
  SCENE(b, "scene");
  T(b, restore ? " and then restore." : ".");
  return b;
}

Build build_rotate_restore(Sampler& S) {
  Build b;
  WorldObject obj = S.make(S.boxy_template(), S.take_texture());
  S.place_random(obj);
  WorldObject d = S.make(S.any_template(), S.take_texture());
  S.place_random(d);
  double angle = pick_angle(S.rng);
  int dir = S.rng.chance(0.5) ? 1 : -1;
  b.tree = pred_sequence({pred_rotated_by(obj.id, angle, dir),
                          pred_rotated_by(obj.id, angle, dir, true, true)});
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", angle);
  T(b, "Rotate ");
  OBJ(b, obj.id);
  T(b, std::string(" ") + buf + " degrees " + dir_word(dir) + " and then restore.");
  return b;
}

Build build_rotate_symmetry(Sampler& S) {
  Build b;
  int k = int(S.rng.uniform_int(2, 3));
  std::string tex = S.take_texture();
  std::vector<Predicate> rots;
  double angle = pick_angle(S.rng);
  int dir = S.rng.chance(0.5) ? 1 : -1;
  for (int i = 0; i < k; ++i) {
    WorldObject o = S.make(S.boxy_template(), tex);
    S.place_random(o);
    rots.push_back(pred_rotated_by(o.id, angle, dir));
  }
  int n = int(S.rng.uniform_int(1, 2));
  for (int i = 0; i < n; ++i) {
    WorldObject dd = S.make(S.any_template(), S.take_texture());
    S.place_random(dd);
  }
  b.tree = pred_set(std::move(rots));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", angle);
  if (S.rng.chance(0.5)) {
    T(b, "Rotate objects with ");
    TEX(b, tex);
    T(b, std::string(" texture ") + buf + " degrees " + dir_word(dir) + ".");
  } else {
    T(b, std::string("Rotate identically textured objects ") + buf + " degrees " +
             dir_word(dir) + ".");
  }
  return b;
}

// shrink each next stack layer so it rests fully on the previous one
void enforce_stack_sizes(std::vector<WorldObject*>& order) {
  for (size_t i = 1; i < order.size(); ++i) {
    double prev = Sampler::xy_reach(order[i - 1]->shape);
    double cur = Sampler::xy_reach(order[i]->shape);
    if (cur > prev * 0.88) {
      double f = prev * 0.88 / cur;
      scale_shape(order[i]->shape, std::max(f, 0.55), f);
      order[i]->mass = mass_of(order[i]->shape);
    }
  }
}

Build build_stack(Sampler& S, bool reversed, bool topple_after) {
  Build b;
  int k = int(S.rng.uniform_int(3, topple_after ? 3 : 4));
  std::vector<WorldObject> objs;
  for (int i = 0; i < k; ++i)
    objs.push_back(S.make(S.pick_template([](const ObjectTemplate& t) {
                            return t.shape == ShapeKind::box || t.shape == ShapeKind::disc;
                          }),
                          S.take_texture()));
  // prompt order o0..o{k-1}; physical stack order is bottom-first
  std::vector<WorldObject*> stack_order;
  if (reversed)
    for (int i = k - 1; i >= 0; --i) stack_order.push_back(&objs[i]);
  else
    for (int i = 0; i < k; ++i) stack_order.push_back(&objs[i]);
  enforce_stack_sizes(stack_order);
  for (auto& o : objs) S.place_random(o, 0.03);

  std::vector<std::string> stack_ids;
  for (auto* o : stack_order) stack_ids.push_back(o->id);
  std::vector<Predicate> steps;
  for (size_t i = 1; i < stack_ids.size(); ++i)
    steps.push_back(pred_on_top(stack_ids[i], {stack_ids[i - 1]}));
  if (topple_after) steps.push_back(pred_topple_structure(stack_ids));
  b.tree = pred_sequence(std::move(steps));

  // staged shadow states for the keystep prompt variants
  std::vector<WorldState> stages;
  {
    WorldState shadow = S.world;
    for (size_t i = 1; i < stack_ids.size(); ++i) {
      WorldObject& top = shadow.obj(stack_ids[i]);
      const WorldObject& below = shadow.obj(stack_ids[i - 1]);
      top.pose.position = {below.pose.position.x, below.pose.position.y,
                           resting_z(top.shape, top.pose.orientation, below.top_z())};
      stages.push_back(shadow);
    }
  }

  auto language_form = [&](std::vector<PromptSegment>& out) {
    auto TT = [&](const std::string& t) {
      out.push_back({PromptSegment::Type::text, t, "", -1});
    };
    auto OO = [&](const std::string& id) {
      out.push_back({PromptSegment::Type::obj_image, "", id, -1});
    };
    TT("Stack ");
    for (size_t i = 1; i < stack_ids.size(); ++i) {
      if (i > 1) TT(", and ");
      OO(stack_ids[i]);
      TT(" on ");
      OO(stack_ids[i - 1]);
    }
    TT(topple_after ? " and then topple the stack." : ".");
  };

  int variant = reversed ? 0 : int(S.rng.uniform_int(1, 4));
  if (reversed) {
    T(b, "Stack ");
    for (int i = 0; i < k; ++i) {
      if (i) T(b, ", ");
      OBJ(b, objs[i].id);
    }
    T(b, topple_after ? " in the reversed order and then topple the stack."
                      : " in the reversed order.");
  } else if (variant == 1) {
    language_form(b.prompt);
  } else if (variant == 2) {
    T(b, "Stack object with ");
    TEX(b, stack_order[1]->texture);
    T(b, " texture on object with ");
    TEX(b, stack_order[0]->texture);
    T(b, " texture");
    for (size_t i = 2; i < stack_order.size(); ++i) {
      T(b, ", object with ");
      TEX(b, stack_order[i]->texture);
      T(b, " texture on object with ");
      TEX(b, stack_order[i - 1]->texture);
      T(b, " texture");
    }
    T(b, topple_after ? " and then topple the stack." : ".");
  } else if (variant == 3) {
    T(b, "Stack objects as in ");
    KS(b, "ks_final");
    b.static_keysteps.push_back({"ks_final", stages.back()});
    T(b, topple_after ? " and then topple the stack." : ".");
    language_form(b.prompt_language);
  } else {
    T(b, "Stack objects in this order ");
    for (size_t i = 0; i < stages.size(); ++i) {
      if (i) T(b, " ");
      std::string ref = "ks" + std::to_string(i);
      KS(b, ref);
      b.static_keysteps.push_back({ref, stages[i]});
    }
    T(b, topple_after ? " and then topple the stack." : ".");
    language_form(b.prompt_language);
  }
  return b;
}

Build build_sort(Sampler& S) {
  Build b;
  int k = int(S.rng.uniform_int(2, 3));
  std::vector<Predicate> goals;
  for (int i = 0; i < k; ++i) {
    std::string tex = S.take_texture();
    WorldObject area = S.make_fixture("area", tex);
    S.place_random(area, 0.05);
    WorldObject obj = S.make(S.any_template(), tex);
    double cap = area.shape.hx * 0.55;
    double ext = Sampler::xy_reach(obj.shape);
    if (ext > cap) {
      double f = cap / ext;
      scale_shape(obj.shape, std::max(f, 0.5), f);
      obj.mass = mass_of(obj.shape);
    }
    S.place_random(obj, 0.03);
    goals.push_back(pred_inside(obj.id, {area.id}));
  }
  b.tree = pred_set(std::move(goals));
  T(b, "Place the objects in the identically textured areas.");
  return b;
}

Build build_swap(Sampler& S, bool by_push) {
  Build b;
  auto tmpl = [&]() -> const ObjectTemplate& {
    return by_push ? S.nonsphere_template() : S.any_template();
  };
  WorldObject a = S.make(tmpl(), S.take_texture());
  WorldObject c = S.make(tmpl(), S.take_texture());
  S.place_random(a, 0.05);
  // keep the pair within pushing range of each other
  const Config& cfg = config();
  double ext = Sampler::xy_reach(c.shape);
  bool placed = false;
  for (int k = 0; k < cfg.sampler_max_retries && !placed; ++k) {
    double ang = S.rng.uniform(-kPi, kPi);
    double d = S.rng.uniform(0.22, 0.38);
    double x = a.pose.position.x + std::cos(ang) * d;
    double y = a.pose.position.y + std::sin(ang) * d;
    if (std::abs(x) > cfg.spawn_max_xy - ext || std::abs(y) > cfg.spawn_max_xy - ext) continue;
    if (!S.spot_free(x, y, ext, 0.05)) continue;
    S.put(c, x, y, S.rng.uniform(-kPi, kPi));
    placed = true;
  }
  if (!placed) fail(Errc::sampler, "swap pair placement failed");
  if (!by_push) {
    WorldObject d = S.make(S.any_template(), S.take_texture());
    S.place_random(d);
  }
  const WorldObject& oa = S.world.obj(a.id);
  const WorldObject& oc = S.world.obj(c.id);
  Vec3 ta{oc.pose.position.x, oc.pose.position.y, oa.pose.position.z};
  Vec3 tc{oa.pose.position.x, oa.pose.position.y, oc.pose.position.z};
  b.tree = pred_set({pred_at_pos(a.id, ta, 0.05, by_push), pred_at_pos(c.id, tc, 0.05, by_push)});
  T(b, "Swap positions of ");
  OBJ(b, a.id);
  T(b, " and ");
  OBJ(b, c.id);
  T(b, by_push ? " by pushing." : ".");
  return b;
}

Build build_swap_rotate(Sampler& S) {
  Build b;
  WorldObject a = S.make(S.boxy_template(), S.take_texture());
  WorldObject c = S.make(S.boxy_template(), S.take_texture());
  S.place_random(a, 0.04);
  S.place_random(c, 0.04);
  double angle = pick_angle(S.rng);
  int dir = S.rng.chance(0.5) ? 1 : -1;
  const WorldObject& oa = S.world.obj(a.id);
  const WorldObject& oc = S.world.obj(c.id);
  Vec3 ta{oc.pose.position.x, oc.pose.position.y, oa.pose.position.z};
  Vec3 tc{oa.pose.position.x, oa.pose.position.y, oc.pose.position.z};
  b.tree = pred_set({pred_at_pos(a.id, ta, 0.05), pred_rotated_by(a.id, angle, dir, false),
                     pred_at_pos(c.id, tc, 0.05), pred_rotated_by(c.id, angle, dir, false)});
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", angle);
  T(b, "Swap positions of ");
  OBJ(b, a.id);
  T(b, " and ");
  OBJ(b, c.id);
  T(b, std::string(" but rotate them by ") + buf + " degrees " + dir_word(dir) + ".");
  return b;
}

Build build_balance(Sampler& S) {
  Build b;
  const Config& cfg = config();
  // the scale: two fixed pans bridged by a drawn beam
  Vec3 pivot{0, 0.30, 0.02};
  std::string pan_tex = S.take_texture();
  auto make_pan = [&](const std::string& id, double x) {
    WorldObject pan;
    pan.id = id;
    pan.shape = Shape::disc(0.1, 0.02);
    pan.texture = pan_tex;
    pan.mass = mass_of(pan.shape);
    pan.fixed = true;
    pan.graspable = false;
    pan.container = true;
    pan.pose = {{x, pivot.y, 0.05}, Quat::identity()};
    S.world.objects.push_back(pan);
    S.desc[id] = (x < 0 ? "left pan" : "right pan");
  };
  make_pan("pan_left", pivot.x - cfg.scale_arm_length);
  make_pan("pan_right", pivot.x + cfg.scale_arm_length);
  BalanceScale scale;
  scale.pivot = pivot;
  scale.arm_length = cfg.scale_arm_length;
  scale.left_pan = "pan_left";
  scale.right_pan = "pan_right";
  S.world.scale = scale;

  // integer-gram masses built from two halves with equal sums
  int n = int(S.rng.uniform_int(4, 5));
  int nl = 2, nr = n - nl;
  std::vector<int64_t> grams;
  for (int t = 0; t < cfg.sampler_max_retries; ++t) {
    grams.clear();
    int64_t sum = 0;
    for (int i = 0; i < nl; ++i) {
      int64_t g = S.rng.uniform_int(60, 200);
      grams.push_back(g);
      sum += g;
    }
    if (nr == 2) {
      int64_t lo = std::max<int64_t>(50, sum - 230), hi = std::min<int64_t>(230, sum - 50);
      if (lo > hi) continue;
      int64_t g = S.rng.uniform_int(lo, hi);
      grams.push_back(g);
      grams.push_back(sum - g);
    } else {
      int64_t g1 = S.rng.uniform_int(50, std::min<int64_t>(180, sum - 100));
      int64_t rest = sum - g1;
      int64_t lo = std::max<int64_t>(40, rest - 210), hi = std::min<int64_t>(210, rest - 40);
      if (lo > hi) continue;
      int64_t g2 = S.rng.uniform_int(lo, hi);
      grams.push_back(g1);
      grams.push_back(g2);
      grams.push_back(rest - g2);
    }
    bool ok = true;
    for (int64_t g : grams)
      if (g < 30 || g > 330) ok = false;
    if (ok) break;
    grams.clear();
  }
  if (grams.empty()) fail(Errc::sampler, "balance mass construction failed");
  // shuffle so the split is not positional
  S.rng.shuffle(grams);

  const ObjectTemplate& tmpl = S.boxy_template();
  std::vector<std::string> ids;
  std::vector<double> masses;
  for (int64_t g : grams) {
    double m = double(g) / 1000.0;
    double h = std::cbrt(m / 8000.0);
    WorldObject o;
    o.id = tmpl.name + "_" + std::to_string(S.counters[tmpl.name]++);
    o.shape = Shape::box(h, h, h);
    o.texture = S.take_texture();
    o.mass = m;
    S.desc[o.id] = catalog().texture(o.texture).display + " " + tmpl.display;
    // stage the weights south of the scale
    S.place_random(o, 0.02, -0.42, 0.1);
    ids.push_back(o.id);
    masses.push_back(m);
  }
  auto split = balance_partition(masses);
  if (!split) fail(Errc::sampler, "sampled masses admit no equal split");
  std::vector<Predicate> placements;
  for (int i : split->first) placements.push_back(pred_on_top(ids[i], {"pan_left"}));
  for (int i : split->second) placements.push_back(pred_on_top(ids[i], {"pan_right"}));
  b.tree = pred_sequence({pred_set(std::move(placements)), pred_balanced()});
  T(b, "Place all the objects on the scale while keeping it in balance.");
  return b;
}

Build build_sort_stack(Sampler& S) {
  Build b;
  int groups = 2;
  std::vector<Predicate> seqs;
  for (int g = 0; g < groups; ++g) {
    std::string tex = S.take_texture();
    int k = int(S.rng.uniform_int(2, 3));
    std::vector<WorldObject> objs;
    for (int i = 0; i < k; ++i)
      objs.push_back(S.make(S.pick_template([](const ObjectTemplate& t) {
                              return t.shape == ShapeKind::box || t.shape == ShapeKind::disc;
                            }),
                            tex));
    std::vector<WorldObject*> order;
    for (auto& o : objs) order.push_back(&o);
    std::sort(order.begin(), order.end(), [](const WorldObject* x, const WorldObject* y) {
      return Sampler::xy_reach(x->shape) > Sampler::xy_reach(y->shape);
    });
    enforce_stack_sizes(order);
    for (auto& o : objs) S.place_random(o, 0.03);
    std::vector<Predicate> steps;
    for (size_t i = 1; i < order.size(); ++i)
      steps.push_back(pred_on_top(order[i]->id, {order[i - 1]->id}));
    seqs.push_back(pred_sequence(std::move(steps)));
  }
  b.tree = pred_set(std::move(seqs));
  T(b, S.rng.chance(0.5) ? "Stack identically textured objects."
                         : "Place identically textured objects on top of each other.");
  return b;
}

Build build_throw_sort(Sampler& S) {
  Build b;
  const Config& cfg = config();
  int k = 2;
  std::vector<Predicate> goals;
  double side = S.rng.chance(0.5) ? 1.0 : -1.0;
  for (int i = 0; i < k; ++i) {
    std::string tex = S.take_texture();
    WorldObject area = S.make_fixture("area", tex);
    // out of the arm's reach: only a throw can get objects there
    double ax = side * (cfg.workspace_max_xy + 0.12);
    double ay = (i == 0 ? -0.14 : 0.14) + S.rng.uniform(-0.04, 0.04);
    S.put(area, ax, ay, 0.0);
    WorldObject obj = S.make(S.any_template(), tex);
    double cap = area.shape.hx * 0.45;
    double ext = Sampler::xy_reach(obj.shape);
    if (ext > cap) {
      double f = cap / ext;
      scale_shape(obj.shape, std::max(f, 0.5), f);
      obj.mass = mass_of(obj.shape);
    }
    S.place_random(obj, 0.03, -0.3, 0.3);
    goals.push_back(pred_sequence({pred_hit(obj.id, area.id, false),
                                   pred_inside(obj.id, {area.id})}));
  }
  b.tree = pred_set(std::move(goals));
  T(b, "Place the objects in the identically textured areas by throwing.");
  return b;
}

// ---------------------------------------------------------------------------
// registry

using BuilderFn = std::function<Build(Sampler&)>;

struct Entry {
  TaskInfo info;
  BuilderFn fn;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> reg = [] {
    std::vector<Entry> r;
    auto add = [&](Level lvl, const std::string& name, BuilderFn fn) {
      r.push_back({{{lvl, name}, !language_skipped(name)}, std::move(fn)});
    };
    add(Level::L0, "match_pose", build_match_pose);
    add(Level::L0, "move_without_hitting", build_move_without_hitting);
    add(Level::L0, "pick", build_pick);
    add(Level::L0, "place", build_place);
    add(Level::L0, "push", build_push);
    add(Level::L0, "rotate", build_rotate);
    add(Level::L0, "throw", [](Sampler& s) { return build_throw(s, false); });
    add(Level::L0, "throw_topple", [](Sampler& s) { return build_throw(s, true); });
    add(Level::L0, "touch", [](Sampler& s) { return build_touch(s, TouchMode::gentle); });
    add(Level::L0, "touch_push", [](Sampler& s) { return build_touch(s, TouchMode::push); });
    add(Level::L0, "touch_topple", [](Sampler& s) { return build_touch(s, TouchMode::topple); });
    add(Level::L0, "trace", build_trace);
    add(Level::L1, "simple_manipulation", build_simple_manipulation);
    add(Level::L1, "follow_order", [](Sampler& s) { return build_follow_order(s, false); });
    add(Level::L1, "follow_order_restore",
        [](Sampler& s) { return build_follow_order(s, true); });
    add(Level::L1, "neighbour", build_neighbour);
    add(Level::L1, "novel_adjective", build_novel_adjective);
    add(Level::L1, "novel_noun", build_novel_noun);
    add(Level::L1, "novel_adj_noun", build_novel_adj_noun);
    add(Level::L1, "rearrange", [](Sampler& s) { return build_rearrange(s, false); });
    add(Level::L1, "rearrange_restore", [](Sampler& s) { return build_rearrange(s, true); });
    add(Level::L1, "rotate_restore", build_rotate_restore);
    add(Level::L1, "rotate_symmetry", build_rotate_symmetry);
    add(Level::L1, "stack", [](Sampler& s) { return build_stack(s, false, false); });
    add(Level::L1, "stack_reversed", [](Sampler& s) { return build_stack(s, true, false); });
    add(Level::L1, "sort", build_sort);
    add(Level::L1, "swap", [](Sampler& s) { return build_swap(s, false); });
    add(Level::L2, "balance", build_balance);
    add(Level::L2, "sort_stack", build_sort_stack);
    add(Level::L2, "stack_topple", [](Sampler& s) { return build_stack(s, false, true); });
    add(Level::L2, "swap_push", [](Sampler& s) { return build_swap(s, true); });
    add(Level::L2, "swap_rotate", build_swap_rotate);
    add(Level::L2, "throw_sort", build_throw_sort);
    return r;
  }();
  return reg;
}

// capture base-camera frames each time a leaf completes during a shadow
// oracle run (keystep prompt assets for follow-order style tasks)
std::vector<Image> shadow_keysteps(const TaskInstance& inst, int count) {
  TaskInstance shadow = inst;
  shadow.assets.clear();
  shadow.prompt.clear();
  Env env(shadow);
  OraclePolicy oracle(shadow);
  Camera cam = base_camera();
  std::vector<Image> frames;
  auto leaves_done = [&]() {
    int n = 0;
    for (const auto& rep : tree_report(env.tree()))
      if (rep.node->children.empty() && rep.node->done()) ++n;
    return n;
  };
  int done_before = leaves_done();
  for (int step = 0; step < config().episode_timeout; ++step) {
    OraclePolicy::Result r = oracle.act(env);
    if (r.gave_up) break;
    Env::StepResult sr = env.step(r.action);
    int done_now = leaves_done();
    while (done_now > done_before && int(frames.size()) < count) {
      frames.push_back(render_frame(env.state(), cam));
      ++done_before;
    }
    done_before = done_now;
    if (int(frames.size()) >= count) return frames;
    if (sr.done) break;
  }
  if (int(frames.size()) < count)
    fail(Errc::sampler, "shadow oracle did not reach the keystep goals");
  return frames;
}

}  // namespace

const char* level_name(Level l) {
  switch (l) {
    case Level::L0: return "L0";
    case Level::L1: return "L1";
    case Level::L2: return "L2";
  }
  return "?";
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test_objects: return "test_objects";
    case Split::test_textures: return "test_textures";
  }
  return "?";
}

Level parse_level(const std::string& s) {
  if (s == "L0" || s == "l0") return Level::L0;
  if (s == "L1" || s == "l1") return Level::L1;
  if (s == "L2" || s == "l2") return Level::L2;
  fail(Errc::invalid_arg, "unknown level: " + s);
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test_objects") return Split::test_objects;
  if (s == "test_textures") return Split::test_textures;
  fail(Errc::invalid_arg, "unknown split: " + s);
}

const std::vector<TaskInfo>& task_list() {
  static const std::vector<TaskInfo> list = [] {
    std::vector<TaskInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return list;
}

const TaskInfo& find_task(const std::string& name) {
  for (const auto& e : registry())
    if (e.info.id.name == name) return e.info;
  fail(Errc::not_found, "unknown task: " + name);
}

NovelBinding novel_word_binding(bool adjective, Rng& rng) {
  static const std::vector<std::string> adjectives = {"daxer", "blicker", "modier", "kobar"};
  static const std::vector<std::string> nouns = {"dax", "blicket", "wug", "zup"};
  static const std::vector<std::string> meanings = {"taller", "shorter", "larger", "smaller"};
  NovelBinding nb;
  if (adjective) {
    nb.word = rng.pick(adjectives);
    nb.meaning = rng.pick(meanings);
  } else {
    nb.word = rng.pick(nouns);
    nb.meaning = "noun";
  }
  return nb;
}

std::string neighbour_of(const WorldState& s, const std::string& obj,
                         const std::string& direction) {
  int dx = 0, dy = 0;
  if (direction == "north") dy = 1;
  else if (direction == "south") dy = -1;
  else if (direction == "east") dx = 1;
  else if (direction == "west") dx = -1;
  else fail(Errc::invalid_arg, "unknown direction: " + direction);
  const WorldObject& o = s.obj(obj);
  double g = config().grid_spacing;
  Vec3 want = o.pose.position + Vec3{dx * g, dy * g, 0};
  for (const auto& other : s.objects) {
    if (other.id == obj) continue;
    if (distance_xy(other.pose.position, want) < 0.03) return other.id;
  }
  fail(Errc::internal, "no neighbour to the " + direction + " of " + obj);
}

TaskInstance instantiate(const TaskId& id, uint64_t seed, Split split) {
  const Entry* entry = nullptr;
  for (const auto& e : registry())
    if (e.info.id.name == id.name) entry = &e;
  if (!entry) fail(Errc::not_found, "unknown task: " + id.name);

  uint64_t mix = Rng::hash_mix(Rng::hash_str(id.name) ^ Rng::hash_mix(seed) ^
                               (uint64_t(split) << 56));
  // The sampler writes objects and descriptions into `b` through references;
  // the builder returns the tree/prompt/keystep parts, merged here.
  Build b;
  {
    Sampler s(mix, split, b);
    Build built = entry->fn(s);
    b.tree = std::move(built.tree);
    b.prompt = std::move(built.prompt);
    b.prompt_language = std::move(built.prompt_language);
    b.static_keysteps = std::move(built.static_keysteps);
    b.oracle_keysteps = built.oracle_keysteps;
    b.type_images = std::move(built.type_images);
    for (auto& [k, v] : built.descriptions) b.descriptions[k] = v;
    s.finish_descriptions();
  }

  TaskInstance inst;
  inst.task = entry->info.id;
  inst.seed = seed;
  inst.split = split;
  inst.tree = std::move(b.tree);
  inst.prompt = std::move(b.prompt);
  inst.prompt_language = std::move(b.prompt_language);
  inst.descriptions = std::move(b.descriptions);
  for (const auto& o : b.world.objects)
    if (!inst.descriptions.count(o.id)) inst.descriptions[o.id] = o.id;
  inst.initial_state = reset_world(b.world);

  // prompt assets
  int oracle_needed = b.oracle_keysteps;
  std::vector<Image> oracle_frames;
  auto static_ks = [&](const std::string& ref) -> const WorldState* {
    for (const auto& [r, st] : b.static_keysteps)
      if (r == ref) return &st;
    return nullptr;
  };
  for (auto& seg : inst.prompt) {
    switch (seg.type) {
      case PromptSegment::Type::text:
        break;
      case PromptSegment::Type::obj_image: {
        PromptAsset asset;
        asset.kind = "obj";
        asset.ref = seg.ref;
        auto ti = b.type_images.find(seg.ref);
        if (ti != b.type_images.end()) {
          asset.image = ti->second;
        } else {
          const WorldObject& o = inst.initial_state.obj(seg.ref);
          asset.image = render_object_image(o.shape, o.texture);
        }
        seg.asset_index = int(inst.assets.size());
        inst.assets.push_back(std::move(asset));
        break;
      }
      case PromptSegment::Type::tex_image: {
        PromptAsset asset;
        asset.kind = "tex";
        asset.ref = seg.ref;
        asset.image = render_texture_image(seg.ref);
        seg.asset_index = int(inst.assets.size());
        inst.assets.push_back(std::move(asset));
        break;
      }
      case PromptSegment::Type::keystep:
      case PromptSegment::Type::scene_image: {
        PromptAsset asset;
        asset.kind = seg.type == PromptSegment::Type::keystep ? "keystep" : "scene";
        asset.ref = seg.ref;
        if (const WorldState* st = static_ks(seg.ref)) {
          WorldState shadow = *st;
          shadow.supporter.assign(shadow.objects.size(), kSupportNone);
          asset.image = render_frame(shadow, base_camera());
        } else {
          if (oracle_frames.empty() && oracle_needed > 0)
            oracle_frames = shadow_keysteps(inst, oracle_needed);
          int idx = 0;
          if (seg.ref.rfind("ks", 0) == 0) idx = std::atoi(seg.ref.c_str() + 2);
          if (idx < 0 || idx >= int(oracle_frames.size()))
            fail(Errc::internal, "keystep reference out of range: " + seg.ref);
          asset.image = oracle_frames[idx];
        }
        seg.asset_index = int(inst.assets.size());
        inst.assets.push_back(std::move(asset));
        break;
      }
    }
  }
  return inst;
}

TaskInstance instantiate(const std::string& name, uint64_t seed, Split split) {
  return instantiate(find_task(name).id, seed, split);
}

PromptDoc render_prompt(const TaskInstance& inst, bool language_only) {
  PromptDoc doc;
  if (!language_only) {
    doc.segments = inst.prompt;
    for (const auto& seg : inst.prompt) {
      if (seg.type == PromptSegment::Type::text) doc.text += seg.text;
      else doc.text += "[image]";
    }
    return doc;
  }
  if (language_skipped(inst.task.name))
    fail(Errc::unsupported,
         "task '" + inst.task.name + "' depends on keystep images and has no language-only form");

  bool has_ks = false;
  for (const auto& seg : inst.prompt)
    if (seg.type == PromptSegment::Type::keystep || seg.type == PromptSegment::Type::scene_image)
      has_ks = true;
  const std::vector<PromptSegment>& src =
      has_ks && !inst.prompt_language.empty() ? inst.prompt_language : inst.prompt;
  for (const auto& seg : src) {
    switch (seg.type) {
      case PromptSegment::Type::text:
        doc.text += seg.text;
        break;
      case PromptSegment::Type::obj_image: {
        auto it = inst.descriptions.find(seg.ref);
        doc.text += it != inst.descriptions.end() ? it->second : seg.ref;
        break;
      }
      case PromptSegment::Type::tex_image: {
        auto it = inst.descriptions.find(seg.ref);
        doc.text += it != inst.descriptions.end() ? it->second : seg.ref;
        break;
      }
      default:
        fail(Errc::unsupported, "prompt still references keystep images");
    }
  }
  doc.segments.push_back({PromptSegment::Type::text, doc.text, "", -1});
  return doc;
}

std::string prompt_text(const TaskInstance& inst) {
  std::string out;
  for (const auto& seg : inst.prompt) {
    switch (seg.type) {
      case PromptSegment::Type::text:
        out += seg.text;
        break;
      case PromptSegment::Type::obj_image:
      case PromptSegment::Type::tex_image: {
        auto it = inst.descriptions.find(seg.ref);
        out += it != inst.descriptions.end() ? it->second : seg.ref;
        break;
      }
      case PromptSegment::Type::keystep:
        out += "[keystep]";
        break;
      case PromptSegment::Type::scene_image:
        out += "[scene]";
        break;
    }
  }
  return out;
}

}  // namespace dsk
