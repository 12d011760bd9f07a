#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/geom.hpp"

namespace dsk {

// One control step: end-effector pose delta plus the gripper scalar.
// Serialized order is [dx, dy, dz, droll, dpitch, dyaw, grip].
struct Action {
  Vec3 translation;  // meters
  Vec3 rotation;     // roll, pitch, yaw deltas, radians (applied in world frame)
  double grip = -1;  // suction engages while > 0

  std::array<double, 7> as_array() const {
    return {translation.x, translation.y, translation.z,
            rotation.x,    rotation.y,    rotation.z,    grip};
  }
  static Action from_array(const std::array<double, 7>& a) {
    return {{a[0], a[1], a[2]}, {a[3], a[4], a[5]}, a[6]};
  }
  bool finite() const;
};

struct WorldObject {
  std::string id;
  Shape shape;
  Pose pose;
  std::string texture;
  double mass = 0;  // kg, density * volume
  bool graspable = true;
  bool fixed = false;      // immovable scenery (obstacles, areas, pans)
  bool container = false;  // objects can be "inside" it
  bool toppled = false;
  bool in_flight = false;
  Vec3 velocity;  // only meaningful while in_flight

  double top_z() const { return pose.position.z + world_half_height(shape, pose.orientation); }
  double bottom_z() const { return pose.position.z - world_half_height(shape, pose.orientation); }
  double height() const { return 2 * world_half_height(shape, pose.orientation); }
};

struct EndEffector {
  Pose pose;
  bool suction_on = false;
  std::string attached;  // object id, empty when nothing is held
  Pose grasp_offset;     // attached pose in the EE frame
  std::vector<Pose> window;  // recent poses, most recent last (velocity estimation)
};

struct TraceGoal {
  enum class Status { pending, active, done };
  Vec3 position;
  double radius = 0.03;
  Status status = Status::pending;
};

struct BalanceScale {
  Vec3 pivot;
  double arm_length = 0.2;
  std::string left_pan, right_pan;  // object ids of the pan discs
  double tilt = 0;                  // radians, positive when the right side is heavier
};

struct Event {
  enum class Type { contact, grasp, release, hit, toppled, goal_touched };
  Type type;
  std::string a, b;
  double speed = 0;
  int goal_index = -1;
};

inline constexpr int kSupportTable = -1;
inline constexpr int kSupportNone = -2;
inline constexpr const char* kTableId = "table";

struct WorldState {
  std::vector<WorldObject> objects;
  EndEffector ee;
  std::optional<BalanceScale> scale;
  std::vector<TraceGoal> goals;
  std::vector<Event> events;   // cleared and repopulated every step
  std::vector<int> supporter;  // per object: object index, kSupportTable or kSupportNone
  int64_t step_count = 0;

  int find(const std::string& id) const;
  const WorldObject& obj(const std::string& id) const;  // throws Errc::not_found
  WorldObject& obj(const std::string& id);
  bool has_event(Event::Type t, const std::string& a = "", const std::string& b = "") const;
};

// Validates and normalizes an initial state: recomputes the support graph,
// rejects interpenetrating placements, zeroes the step counter.
WorldState reset_world(const WorldState& initial);

// Advances one control step. Pure: the input state is untouched.
WorldState step(const WorldState& state, const Action& action);

// Drops every unsupported object to its resting height (table or a surface
// with enough footprint overlap). Used by step internally and by samplers.
void settle(WorldState& state);

// Angle between the object's local +z axis and world up, in [0, pi].
double vertical_axis_deviation(const WorldObject& o);

// Finite-difference velocity over the EE pose window; zero with < 2 samples.
Vec3 ee_velocity(const WorldState& state);

// Tilt from the mass difference of the two pans; clamped. Zero without a scale.
double scale_tilt(const WorldState& state);
bool scale_balanced(const WorldState& state);

// Index of the object (or table) currently found under object i, by the
// support rule; kSupportNone if it hangs in the air.
int probe_supporter(const WorldState& state, int i);

// True when the support chain under object i bottoms out at object `root`.
bool supported_by(const WorldState& state, int i, int root);

double mass_of(const Shape& s);

// Contact sphere around the EE tip.
Shape ee_shape();
Pose ee_pose(const WorldState& state);
bool ee_touching(const WorldState& state, int i);

// Resting z for the shape's center when its bottom sits on support_top.
double resting_z(const Shape& s, const Quat& q, double support_top);

}  // namespace dsk
