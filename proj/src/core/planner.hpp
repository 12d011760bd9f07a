#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "core/geom.hpp"
#include "core/rng.hpp"

namespace dsk {

struct Obstacle {
  Shape shape;
  Pose pose;
};

struct PlanQuery {
  Pose start;
  Pose goal;
  Shape moving;  // swept shape, usually a bounding sphere of EE + cargo
  std::vector<Obstacle> obstacles;
  Vec3 bounds_min;
  Vec3 bounds_max;
  uint64_t seed = 0;
};

// Sparse corner waypoints; executors interpolate positions at `resolution`
// spacing and slerp orientation along accumulated arc length.
struct Path {
  std::vector<Pose> waypoints;
  double resolution = 0.02;

  double length() const;
  // Pose at arc-length s from the start (clamped to the ends).
  Pose at_arc(double s) const;
};

enum class PlanOutcome { ok, invalid_start, invalid_goal, exhausted };

struct PlanResult {
  PlanOutcome outcome = PlanOutcome::exhausted;
  Path path;
  bool ok() const { return outcome == PlanOutcome::ok; }
};

// Bidirectional RRT over EE positions; deterministic in the query seed.
// Start/goal in collision are rejected up front, distinct from search failure.
PlanResult rrt_connect(const PlanQuery& q);

// Random shortcutting followed by a greedy string-pull; never longer than the
// input and stays collision-free against the same obstacle set.
Path smooth(const Path& path, const Shape& moving, const std::vector<Obstacle>& obstacles,
            Rng& rng, int attempts);

// True when every sample at collision_check_res spacing along a->b is free.
bool segment_free(const Vec3& a, const Vec3& b, const Shape& moving, const Quat& orientation,
                  const std::vector<Obstacle>& obstacles);

// Launch velocity that lands a projectile released at `release` on `target`
// for the given elevation angle, under the engine's gravity. nullopt when the
// geometry is unreachable at that angle.
std::optional<Vec3> ballistic_release(const Vec3& release, const Vec3& target, double angle_rad);

// Exact equal-sum bipartition covering all items (sub-milligram resolution),
// deterministic tie-break: lexicographically smallest left index set.
std::optional<std::pair<std::vector<int>, std::vector<int>>> balance_partition(
    const std::vector<double>& masses_kg);

}  // namespace dsk
