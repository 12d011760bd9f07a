#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dsk {

struct Vec2 {
  double x = 0, y = 0;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  double norm_xy() const { return std::sqrt(x * x + y * y); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
  Vec3 horizontal() const { return {x, y, 0}; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double distance_xy(const Vec3& a, const Vec3& b) { return (a - b).norm_xy(); }

// Unit quaternion (w, x, y, z). Hamilton convention: (a * b) applies b first.
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  static Quat identity() { return {}; }

  static Quat from_axis_angle(const Vec3& axis, double angle) {
    Vec3 a = axis.normalized();
    double h = angle * 0.5, s = std::sin(h);
    return Quat{std::cos(h), a.x * s, a.y * s, a.z * s}.normalized();
  }

  // ZYX convention: yaw about z, then pitch about y, then roll about x.
  static Quat from_rpy(double roll, double pitch, double yaw);

  Quat operator*(const Quat& o) const {
    return Quat{w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w}
        .normalized();
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  Quat normalized() const {
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n == 0) return identity();
    return {w / n, x / n, y / n, z / n};
  }

  Vec3 rotate(const Vec3& v) const {
    // v' = v + 2 q_vec x (q_vec x v + w v)
    Vec3 q{x, y, z};
    Vec3 t = q.cross(v) * 2.0;
    return v + t * w + q.cross(t);
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
};

// Geodesic angle between two orientations, in [0, pi].
double quat_angle(const Quat& a, const Quat& b);
Quat slerp(const Quat& a, const Quat& b, double t);
// Yaw of the rotated +x axis about world z.
double yaw_of(const Quat& q);
// ZYX Euler angles (roll, pitch, yaw); inverse of Quat::from_rpy.
Vec3 rpy_of(const Quat& q);
// Smallest signed difference a - b wrapped to (-pi, pi].
double wrap_angle(double a);

struct Pose {
  Vec3 position;
  Quat orientation;

  static Pose identity() { return {}; }
  Pose inverse() const {
    Quat qi = orientation.conjugate();
    return {qi.rotate(-position), qi};
  }
};

// Rigid composition a then b in a's frame (a o b).
Pose compose(const Pose& a, const Pose& b);

struct PoseError {
  double pos = 0;  // meters
  double rot = 0;  // radians
  double combined = 0;
};

PoseError pose_error(const Pose& a, const Pose& b);

// ---------------------------------------------------------------------------
// Shapes

enum class ShapeKind { box, disc, sphere };

struct Shape {
  ShapeKind kind = ShapeKind::box;
  // box: half extents hx, hy, hz. disc: radius r, full height h. sphere: radius r.
  double hx = 0.02, hy = 0.02, hz = 0.02;
  double r = 0.02, h = 0.04;

  static Shape box(double hx, double hy, double hz) {
    Shape s;
    s.kind = ShapeKind::box;
    s.hx = hx; s.hy = hy; s.hz = hz;
    return s;
  }
  static Shape disc(double radius, double height) {
    Shape s;
    s.kind = ShapeKind::disc;
    s.r = radius; s.h = height;
    return s;
  }
  static Shape sphere(double radius) {
    Shape s;
    s.kind = ShapeKind::sphere;
    s.r = radius;
    return s;
  }

  bool valid() const;
  double volume() const;
  // Radius of the tightest sphere centered at the shape origin.
  double bounding_radius() const;
};

// Half height of the axis-aligned bounding box of the oriented shape.
double world_half_height(const Shape& s, const Quat& q);

struct Contact {
  Vec3 point;
  Vec3 normal;  // unit, pointing from shape a into shape b
  double depth = 0;
};

// Overlap test; nullopt when the volumes are disjoint. Symmetric up to the
// normal sign. Disc pairs involving boxes (and tilted disc-disc pairs) use an
// oriented-box proxy for the disc.
std::optional<Contact> collide(const Shape& sa, const Pose& pa, const Shape& sb, const Pose& pb);

// ---------------------------------------------------------------------------
// Ground-plane footprints

struct Footprint {
  bool is_circle = false;
  Vec2 center;
  double radius = 0;
  std::vector<Vec2> poly;  // convex, CCW (used when !is_circle)

  bool contains(double px, double py) const;
  void bounds(double& x0, double& y0, double& x1, double& y1) const;
};

Footprint footprint_of(const Shape& s, const Pose& p);

// Fraction of `top`'s ground-plane footprint covered by `base`'s footprint,
// sampled on a deterministic grid (config().footprint_grid).
double footprint_overlap(const Shape& top_s, const Pose& top_p, const Shape& base_s,
                         const Pose& base_p);

// ---------------------------------------------------------------------------
// Cameras

struct Camera {
  std::string id = "base";
  Vec2 window_center;   // world x,y of the view center
  double window_w = 1.8;
  double window_h = 1.8;
  int res_w = 256;
  int res_h = 256;
  bool follows_ee = false;

  bool valid() const { return res_w > 0 && res_h > 0 && window_w > 0 && window_h > 0; }
};

// Orthographic projection onto the pixel grid (x right, y down); z is ignored
// here and only used by the renderer for painter ordering. nullopt when the
// point falls outside the frame.
std::optional<Vec2> project(const Camera& cam, const Vec3& world_point);

}  // namespace dsk
