#include "core/planner.hpp"

#include <algorithm>
#include <cmath>

#include "core/config.hpp"
#include "core/error.hpp"

namespace dsk {

namespace {

bool position_free(const Vec3& p, const Shape& moving, const Quat& q,
                   const std::vector<Obstacle>& obstacles) {
  Pose pose{p, q};
  for (const auto& ob : obstacles) {
    if (distance(p, ob.pose.position) >
        moving.bounding_radius() + ob.shape.bounding_radius() + 1e-9)
      continue;
    if (collide(moving, pose, ob.shape, ob.pose)) return false;
  }
  return true;
}

struct Tree {
  std::vector<Vec3> nodes;
  std::vector<int> parent;

  int nearest(const Vec3& p) const {
    int best = 0;
    double bd = 1e18;
    for (size_t i = 0; i < nodes.size(); ++i) {
      double d = distance(nodes[i], p);
      if (d < bd) {
        bd = d;
        best = int(i);
      }
    }
    return best;
  }

  int add(const Vec3& p, int par) {
    nodes.push_back(p);
    parent.push_back(par);
    return int(nodes.size()) - 1;
  }

  std::vector<Vec3> chain_to_root(int i) const {
    std::vector<Vec3> out;
    while (i >= 0) {
      out.push_back(nodes[i]);
      i = parent[i];
    }
    return out;
  }
};

enum class Extend { trapped, advanced, reached };

Extend extend_tree(Tree& t, const Vec3& target, const Shape& moving, const Quat& q,
                   const std::vector<Obstacle>& obstacles, double step, int& new_idx) {
  int near = t.nearest(target);
  Vec3 from = t.nodes[near];
  double d = distance(from, target);
  bool reaching = d <= step;
  Vec3 to = reaching ? target : from + (target - from) * (step / d);
  if (!segment_free(from, to, moving, q, obstacles)) return Extend::trapped;
  new_idx = t.add(to, near);
  return reaching ? Extend::reached : Extend::advanced;
}

Path assemble(const std::vector<Vec3>& pts, const Pose& start, const Pose& goal) {
  Path path;
  path.resolution = config().path_resolution;
  double total = 0;
  std::vector<double> arc(pts.size(), 0);
  for (size_t i = 1; i < pts.size(); ++i) {
    total += distance(pts[i - 1], pts[i]);
    arc[i] = total;
  }
  for (size_t i = 0; i < pts.size(); ++i) {
    double t = total > 1e-12 ? arc[i] / total : 1.0;
    path.waypoints.push_back({pts[i], slerp(start.orientation, goal.orientation, t)});
  }
  if (path.waypoints.empty()) path.waypoints = {start, goal};
  return path;
}

// collapse to the fewest corners whose connecting segments are free
void string_pull(std::vector<Vec3>& pts, const Shape& moving, const Quat& q,
                 const std::vector<Obstacle>& obstacles) {
  if (pts.size() < 3) return;
  std::vector<Vec3> out;
  out.push_back(pts.front());
  size_t i = 0;
  while (i + 1 < pts.size()) {
    size_t j = pts.size() - 1;
    for (; j > i + 1; --j) {
      if (segment_free(pts[i], pts[j], moving, q, obstacles)) break;
    }
    out.push_back(pts[j]);
    i = j;
  }
  pts = out;
}

}  // namespace

double Path::length() const {
  double total = 0;
  for (size_t i = 1; i < waypoints.size(); ++i)
    total += distance(waypoints[i - 1].position, waypoints[i].position);
  return total;
}

Pose Path::at_arc(double s) const {
  if (waypoints.empty()) return {};
  if (s <= 0) return waypoints.front();
  double acc = 0;
  for (size_t i = 1; i < waypoints.size(); ++i) {
    double seg = distance(waypoints[i - 1].position, waypoints[i].position);
    if (acc + seg >= s && seg > 1e-12) {
      double t = (s - acc) / seg;
      Vec3 p = waypoints[i - 1].position + (waypoints[i].position - waypoints[i - 1].position) * t;
      Quat q = slerp(waypoints[i - 1].orientation, waypoints[i].orientation, t);
      return {p, q};
    }
    acc += seg;
  }
  return waypoints.back();
}

bool segment_free(const Vec3& a, const Vec3& b, const Shape& moving, const Quat& orientation,
                  const std::vector<Obstacle>& obstacles) {
  double d = distance(a, b);
  int n = std::max(1, int(std::ceil(d / config().collision_check_res)));
  for (int k = 0; k <= n; ++k) {
    double t = double(k) / n;
    if (!position_free(a + (b - a) * t, moving, orientation, obstacles)) return false;
  }
  return true;
}

PlanResult rrt_connect(const PlanQuery& q) {
  const Config& cfg = config();
  PlanResult res;
  const Quat check_q = q.start.orientation;
  if (!position_free(q.start.position, q.moving, check_q, q.obstacles)) {
    res.outcome = PlanOutcome::invalid_start;
    return res;
  }
  if (!position_free(q.goal.position, q.moving, check_q, q.obstacles)) {
    res.outcome = PlanOutcome::invalid_goal;
    return res;
  }

  // direct connection handles the common unobstructed case
  if (segment_free(q.start.position, q.goal.position, q.moving, check_q, q.obstacles)) {
    res.outcome = PlanOutcome::ok;
    res.path = assemble({q.start.position, q.goal.position}, q.start, q.goal);
    return res;
  }

  Rng rng(Rng::hash_mix(q.seed ^ 0x5eedf00dULL));
  Tree ta, tb;
  ta.add(q.start.position, -1);
  tb.add(q.goal.position, -1);
  Tree* grow = &ta;
  Tree* other = &tb;
  bool grow_is_start = true;

  auto sample = [&]() -> Vec3 {
    if (rng.chance(cfg.rrt_goal_bias)) return other->nodes[0];
    return {rng.uniform(q.bounds_min.x, q.bounds_max.x),
            rng.uniform(q.bounds_min.y, q.bounds_max.y),
            rng.uniform(q.bounds_min.z, q.bounds_max.z)};
  };

  while (int(ta.nodes.size() + tb.nodes.size()) < cfg.rrt_node_budget) {
    Vec3 target = sample();
    int n_new = -1;
    if (extend_tree(*grow, target, q.moving, check_q, q.obstacles, cfg.rrt_step, n_new) !=
        Extend::trapped) {
      // try to connect the other tree all the way to the new node
      Vec3 bridge = grow->nodes[n_new];
      int o_new = -1;
      Extend e = Extend::advanced;
      while (e == Extend::advanced &&
             int(ta.nodes.size() + tb.nodes.size()) < cfg.rrt_node_budget) {
        e = extend_tree(*other, bridge, q.moving, check_q, q.obstacles, cfg.rrt_step, o_new);
      }
      if (e == Extend::reached) {
        std::vector<Vec3> from_a =
            (grow_is_start ? grow : other)->chain_to_root(grow_is_start ? n_new : o_new);
        std::reverse(from_a.begin(), from_a.end());
        std::vector<Vec3> from_b =
            (grow_is_start ? other : grow)->chain_to_root(grow_is_start ? o_new : n_new);
        std::vector<Vec3> pts = from_a;
        pts.insert(pts.end(), from_b.begin(), from_b.end());
        string_pull(pts, q.moving, check_q, q.obstacles);
        res.outcome = PlanOutcome::ok;
        res.path = assemble(pts, q.start, q.goal);
        return res;
      }
    }
    std::swap(grow, other);
    grow_is_start = !grow_is_start;
  }
  res.outcome = PlanOutcome::exhausted;
  return res;
}

Path smooth(const Path& path, const Shape& moving, const std::vector<Obstacle>& obstacles,
            Rng& rng, int attempts) {
  if (path.waypoints.size() < 3) return path;
  const Quat q = path.waypoints.front().orientation;
  std::vector<Vec3> pts;
  for (const auto& w : path.waypoints) pts.push_back(w.position);
  for (int a = 0; a < attempts && pts.size() > 2; ++a) {
    int i = int(rng.uniform_int(0, int64_t(pts.size()) - 2));
    int j = int(rng.uniform_int(i + 1, int64_t(pts.size()) - 1));
    if (j - i < 2) continue;
    if (segment_free(pts[i], pts[j], moving, q, obstacles))
      pts.erase(pts.begin() + i + 1, pts.begin() + j);
  }
  string_pull(pts, moving, q, obstacles);
  return assemble(pts, path.waypoints.front(), path.waypoints.back());
}

std::optional<Vec3> ballistic_release(const Vec3& release, const Vec3& target, double angle_rad) {
  const double g = config().gravity;
  Vec3 flat = (target - release).horizontal();
  double d = flat.norm();
  if (d < 1e-9) return Vec3{0, 0, 0};
  double dh = release.z - target.z;
  double c = std::cos(angle_rad), s = std::sin(angle_rad);
  if (c < 1e-9) return std::nullopt;
  double denom = 2.0 * c * c * (dh + d * (s / c));
  if (denom <= 1e-12) return std::nullopt;  // target above the reachable apex
  double v2 = d * d * g / denom;
  if (v2 <= 0) return std::nullopt;
  double v = std::sqrt(v2);
  Vec3 u = flat * (1.0 / d);
  return u * (v * c) + Vec3{0, 0, v * s};
}

std::optional<std::pair<std::vector<int>, std::vector<int>>> balance_partition(
    const std::vector<double>& masses_kg) {
  int n = int(masses_kg.size());
  if (n == 0) fail(Errc::invalid_arg, "balance_partition on empty list");
  if (n > 20) fail(Errc::invalid_arg, "balance_partition supports at most 20 items");
  // integers at sub-milligram resolution make "equal" exact
  std::vector<int64_t> m(n);
  int64_t total = 0;
  for (int i = 0; i < n; ++i) {
    m[i] = llround(masses_kg[i] * 1e6);
    total += m[i];
  }
  if (total % 2 != 0) return std::nullopt;
  const int64_t half = total / 2;

  std::vector<int> best_left;
  for (uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    int64_t sum = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) sum += m[i];
    if (sum != half) continue;
    std::vector<int> left;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) left.push_back(i);
    if (best_left.empty() || left < best_left) best_left = left;
  }
  if (best_left.empty()) return std::nullopt;
  std::vector<int> right;
  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    if (k < best_left.size() && best_left[k] == i) ++k;
    else right.push_back(i);
  }
  return std::make_pair(best_left, right);
}

}  // namespace dsk
