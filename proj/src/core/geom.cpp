#include "core/geom.hpp"

#include <algorithm>

#include "core/config.hpp"

namespace dsk {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Mat3 {
  // columns are the rotated basis axes
  Vec3 cx, cy, cz;

  static Mat3 from_quat(const Quat& q) {
    return {q.rotate({1, 0, 0}), q.rotate({0, 1, 0}), q.rotate({0, 0, 1})};
  }
  Vec3 mul(const Vec3& v) const { return cx * v.x + cy * v.y + cz * v.z; }
  Vec3 mul_transposed(const Vec3& v) const { return {cx.dot(v), cy.dot(v), cz.dot(v)}; }
  Vec3 axis(int i) const { return i == 0 ? cx : i == 1 ? cy : cz; }
};

bool disc_upright(const Quat& q) {
  Vec3 axis = q.rotate({0, 0, 1});
  return std::abs(axis.z) > 1.0 - 1e-9;
}

Shape disc_proxy_box(const Shape& s) { return Shape::box(s.r, s.r, s.h * 0.5); }

std::optional<Contact> collide_spheres(const Vec3& ca, double ra, const Vec3& cb, double rb) {
  Vec3 d = cb - ca;
  double dist = d.norm();
  double depth = ra + rb - dist;
  if (depth < 0) return std::nullopt;
  Vec3 n = dist > 1e-12 ? d * (1.0 / dist) : Vec3{0, 0, 1};
  return Contact{ca + n * (ra - depth * 0.5), n, depth};
}

// a is the box, b the sphere; normal points from box into sphere.
std::optional<Contact> collide_box_sphere(const Shape& box, const Pose& pa, double r,
                                          const Vec3& center) {
  Mat3 R = Mat3::from_quat(pa.orientation);
  Vec3 local = R.mul_transposed(center - pa.position);
  Vec3 half{box.hx, box.hy, box.hz};
  Vec3 clamped{std::clamp(local.x, -half.x, half.x), std::clamp(local.y, -half.y, half.y),
               std::clamp(local.z, -half.z, half.z)};
  Vec3 diff = local - clamped;
  double dist = diff.norm();
  if (dist > 1e-12) {
    double depth = r - dist;
    if (depth < 0) return std::nullopt;
    Vec3 n = R.mul(diff * (1.0 / dist));
    return Contact{pa.position + R.mul(clamped), n, depth};
  }
  // center inside the box: exit through the nearest face
  double best = half.x - std::abs(local.x);
  int axis = 0;
  if (half.y - std::abs(local.y) < best) { best = half.y - std::abs(local.y); axis = 1; }
  if (half.z - std::abs(local.z) < best) { best = half.z - std::abs(local.z); axis = 2; }
  Vec3 n_local{};
  double sign = ((axis == 0 ? local.x : axis == 1 ? local.y : local.z) >= 0) ? 1.0 : -1.0;
  if (axis == 0) n_local.x = sign;
  if (axis == 1) n_local.y = sign;
  if (axis == 2) n_local.z = sign;
  Vec3 face_pt = local + n_local * best;
  return Contact{pa.position + R.mul(face_pt), R.mul(n_local), r + best};
}

std::optional<Contact> collide_boxes(const Shape& a, const Pose& pa, const Shape& b,
                                     const Pose& pb) {
  Mat3 Ra = Mat3::from_quat(pa.orientation);
  Mat3 Rb = Mat3::from_quat(pb.orientation);
  Vec3 t = pb.position - pa.position;
  double ha[3] = {a.hx, a.hy, a.hz};
  double hb[3] = {b.hx, b.hy, b.hz};

  std::vector<Vec3> axes;
  axes.reserve(15);
  for (int i = 0; i < 3; ++i) axes.push_back(Ra.axis(i));
  for (int i = 0; i < 3; ++i) axes.push_back(Rb.axis(i));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vec3 c = Ra.axis(i).cross(Rb.axis(j));
      if (c.norm() > 1e-8) axes.push_back(c.normalized());
    }

  double best_pen = 1e18;
  Vec3 best_axis{0, 0, 1};
  for (const Vec3& L : axes) {
    double ra = 0, rb = 0;
    for (int i = 0; i < 3; ++i) {
      ra += ha[i] * std::abs(Ra.axis(i).dot(L));
      rb += hb[i] * std::abs(Rb.axis(i).dot(L));
    }
    double d = t.dot(L);
    double pen = ra + rb - std::abs(d);
    if (pen < 0) return std::nullopt;
    if (pen < best_pen) {
      best_pen = pen;
      best_axis = d >= 0 ? L : -L;
    }
  }
  return Contact{pa.position + t * 0.5, best_axis, best_pen};
}

// both discs upright: exact circle-circle in plan view plus z-interval overlap
std::optional<Contact> collide_upright_discs(const Shape& a, const Pose& pa, const Shape& b,
                                             const Pose& pb) {
  Vec3 d = pb.position - pa.position;
  double dxy = d.norm_xy();
  double pen_r = a.r + b.r - dxy;
  double pen_z = (a.h + b.h) * 0.5 - std::abs(d.z);
  if (pen_r < 0 || pen_z < 0) return std::nullopt;
  if (pen_z < pen_r) {
    Vec3 n{0, 0, d.z >= 0 ? 1.0 : -1.0};
    Vec3 mid = (pa.position + pb.position) * 0.5;
    return Contact{mid, n, pen_z};
  }
  Vec3 n = dxy > 1e-12 ? Vec3{d.x / dxy, d.y / dxy, 0} : Vec3{1, 0, 0};
  Vec3 pt = pa.position + n * (a.r - pen_r * 0.5);
  pt.z = (pa.position.z + pb.position.z) * 0.5;
  return Contact{pt, n, pen_r};
}

// a is the disc (solid cylinder), b the sphere
std::optional<Contact> collide_disc_sphere(const Shape& disc, const Pose& pa, double r,
                                           const Vec3& center) {
  Mat3 R = Mat3::from_quat(pa.orientation);
  Vec3 local = R.mul_transposed(center - pa.position);
  double radial = std::sqrt(local.x * local.x + local.y * local.y);
  double half_h = disc.h * 0.5;
  bool inside = radial <= disc.r && std::abs(local.z) <= half_h;
  if (inside) {
    double margin_r = disc.r - radial;
    double margin_z = half_h - std::abs(local.z);
    Vec3 n_local;
    double depth;
    if (margin_z <= margin_r) {
      n_local = {0, 0, local.z >= 0 ? 1.0 : -1.0};
      depth = r + margin_z;
    } else {
      Vec3 dir = radial > 1e-12 ? Vec3{local.x / radial, local.y / radial, 0} : Vec3{1, 0, 0};
      n_local = dir;
      depth = r + margin_r;
    }
    return Contact{center, R.mul(n_local), depth};
  }
  Vec3 dir = radial > 1e-12 ? Vec3{local.x / radial, local.y / radial, 0} : Vec3{1, 0, 0};
  Vec3 closest = dir * std::min(radial, disc.r);
  closest.z = std::clamp(local.z, -half_h, half_h);
  Vec3 diff = local - closest;
  double dist = diff.norm();
  double depth = r - dist;
  if (depth < 0) return std::nullopt;
  Vec3 n = R.mul(diff * (1.0 / dist));
  return Contact{pa.position + R.mul(closest), n, depth};
}

int shape_rank(ShapeKind k) {
  switch (k) {
    case ShapeKind::box: return 0;
    case ShapeKind::disc: return 1;
    case ShapeKind::sphere: return 2;
  }
  return 3;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Vec2> projected_box_corners(const Shape& s, const Pose& p) {
  Mat3 R = Mat3::from_quat(p.orientation);
  std::vector<Vec2> pts;
  pts.reserve(8);
  for (int i = 0; i < 8; ++i) {
    Vec3 c{(i & 1) ? s.hx : -s.hx, (i & 2) ? s.hy : -s.hy, (i & 4) ? s.hz : -s.hz};
    Vec3 w = p.position + R.mul(c);
    pts.push_back({w.x, w.y});
  }
  return pts;
}

}  // namespace

Quat Quat::from_rpy(double roll, double pitch, double yaw) {
  Quat qx = from_axis_angle({1, 0, 0}, roll);
  Quat qy = from_axis_angle({0, 1, 0}, pitch);
  Quat qz = from_axis_angle({0, 0, 1}, yaw);
  return qz * qy * qx;
}

double quat_angle(const Quat& a, const Quat& b) {
  // atan2 form keeps precision near zero where acos(dot) collapses
  Quat rel = a.conjugate() * b;
  double v = std::sqrt(rel.x * rel.x + rel.y * rel.y + rel.z * rel.z);
  return 2.0 * std::atan2(v, std::abs(rel.w));
}

Quat slerp(const Quat& a, const Quat& b, double t) {
  double d = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  Quat bb = b;
  if (d < 0) {
    bb = {-b.w, -b.x, -b.y, -b.z};
    d = -d;
  }
  d = std::clamp(d, -1.0, 1.0);
  double theta = std::acos(d);
  if (theta < 1e-9) {
    return Quat{a.w + (bb.w - a.w) * t, a.x + (bb.x - a.x) * t, a.y + (bb.y - a.y) * t,
                a.z + (bb.z - a.z) * t}
        .normalized();
  }
  double sa = std::sin((1 - t) * theta) / std::sin(theta);
  double sb = std::sin(t * theta) / std::sin(theta);
  return Quat{a.w * sa + bb.w * sb, a.x * sa + bb.x * sb, a.y * sa + bb.y * sb,
              a.z * sa + bb.z * sb}
      .normalized();
}

double yaw_of(const Quat& q) {
  Vec3 xr = q.rotate({1, 0, 0});
  return std::atan2(xr.y, xr.x);
}

Vec3 rpy_of(const Quat& q) {
  double roll = std::atan2(2 * (q.w * q.x + q.y * q.z), 1 - 2 * (q.x * q.x + q.y * q.y));
  double pitch = std::asin(std::clamp(2 * (q.w * q.y - q.z * q.x), -1.0, 1.0));
  double yaw = std::atan2(2 * (q.w * q.z + q.x * q.y), 1 - 2 * (q.y * q.y + q.z * q.z));
  return {roll, pitch, yaw};
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2 * kPi);
  if (a <= 0) a += 2 * kPi;
  return a - kPi;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + a.orientation.rotate(b.position), a.orientation * b.orientation};
}

PoseError pose_error(const Pose& a, const Pose& b) {
  PoseError e;
  e.pos = distance(a.position, b.position);
  e.rot = quat_angle(a.orientation, b.orientation);
  e.combined = e.pos + config().rot_error_weight * e.rot;
  return e;
}

bool Shape::valid() const {
  switch (kind) {
    case ShapeKind::box: return hx > 0 && hy > 0 && hz > 0;
    case ShapeKind::disc: return r > 0 && h > 0;
    case ShapeKind::sphere: return r > 0;
  }
  return false;
}

double Shape::volume() const {
  switch (kind) {
    case ShapeKind::box: return 8 * hx * hy * hz;
    case ShapeKind::disc: return kPi * r * r * h;
    case ShapeKind::sphere: return 4.0 / 3.0 * kPi * r * r * r;
  }
  return 0;
}

double Shape::bounding_radius() const {
  switch (kind) {
    case ShapeKind::box: return std::sqrt(hx * hx + hy * hy + hz * hz);
    case ShapeKind::disc: return std::sqrt(r * r + h * h * 0.25);
    case ShapeKind::sphere: return r;
  }
  return 0;
}

double world_half_height(const Shape& s, const Quat& q) {
  switch (s.kind) {
    case ShapeKind::box: {
      Vec3 ax = q.rotate({1, 0, 0}), ay = q.rotate({0, 1, 0}), az = q.rotate({0, 0, 1});
      return std::abs(ax.z) * s.hx + std::abs(ay.z) * s.hy + std::abs(az.z) * s.hz;
    }
    case ShapeKind::disc: {
      Vec3 az = q.rotate({0, 0, 1});
      double c = std::abs(az.z);
      return c * s.h * 0.5 + std::sqrt(std::max(0.0, 1 - c * c)) * s.r;
    }
    case ShapeKind::sphere: return s.r;
  }
  return 0;
}

std::optional<Contact> collide(const Shape& sa, const Pose& pa, const Shape& sb,
                               const Pose& pb) {
  if (shape_rank(sa.kind) > shape_rank(sb.kind)) {
    auto c = collide(sb, pb, sa, pa);
    if (c) c->normal = -c->normal;
    return c;
  }
  switch (sa.kind) {
    case ShapeKind::box:
      switch (sb.kind) {
        case ShapeKind::box: return collide_boxes(sa, pa, sb, pb);
        case ShapeKind::disc: return collide_boxes(sa, pa, disc_proxy_box(sb), pb);
        case ShapeKind::sphere: return collide_box_sphere(sa, pa, sb.r, pb.position);
      }
      break;
    case ShapeKind::disc:
      switch (sb.kind) {
        case ShapeKind::disc:
          if (disc_upright(pa.orientation) && disc_upright(pb.orientation))
            return collide_upright_discs(sa, pa, sb, pb);
          return collide_boxes(disc_proxy_box(sa), pa, disc_proxy_box(sb), pb);
        case ShapeKind::sphere: return collide_disc_sphere(sa, pa, sb.r, pb.position);
        default: break;
      }
      break;
    case ShapeKind::sphere:
      return collide_spheres(pa.position, sa.r, pb.position, sb.r);
  }
  return std::nullopt;
}

bool Footprint::contains(double px, double py) const {
  if (is_circle) {
    double dx = px - center.x, dy = py - center.y;
    return dx * dx + dy * dy <= radius * radius;
  }
  if (poly.size() < 3) return false;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    double cr = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (cr < -1e-12) return false;
  }
  return true;
}

void Footprint::bounds(double& x0, double& y0, double& x1, double& y1) const {
  if (is_circle) {
    x0 = center.x - radius;
    y0 = center.y - radius;
    x1 = center.x + radius;
    y1 = center.y + radius;
    return;
  }
  x0 = y0 = 1e18;
  x1 = y1 = -1e18;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
}

Footprint footprint_of(const Shape& s, const Pose& p) {
  Footprint f;
  switch (s.kind) {
    case ShapeKind::sphere:
      f.is_circle = true;
      f.center = {p.position.x, p.position.y};
      f.radius = s.r;
      return f;
    case ShapeKind::disc:
      if (disc_upright(p.orientation)) {
        f.is_circle = true;
        f.center = {p.position.x, p.position.y};
        f.radius = s.r;
        return f;
      }
      f.poly = convex_hull(projected_box_corners(disc_proxy_box(s), p));
      return f;
    case ShapeKind::box:
      f.poly = convex_hull(projected_box_corners(s, p));
      return f;
  }
  return f;
}

double footprint_overlap(const Shape& top_s, const Pose& top_p, const Shape& base_s,
                         const Pose& base_p) {
  Footprint top = footprint_of(top_s, top_p);
  Footprint base = footprint_of(base_s, base_p);
  double x0, y0, x1, y1;
  top.bounds(x0, y0, x1, y1);
  const double g = config().footprint_grid;
  // grid anchored at the world origin so growing the base is exactly monotone
  int64_t ix0 = int64_t(std::floor(x0 / g)) - 1;
  int64_t ix1 = int64_t(std::ceil(x1 / g)) + 1;
  int64_t iy0 = int64_t(std::floor(y0 / g)) - 1;
  int64_t iy1 = int64_t(std::ceil(y1 / g)) + 1;
  int64_t in_top = 0, in_both = 0;
  for (int64_t iy = iy0; iy < iy1; ++iy) {
    double py = (double(iy) + 0.5) * g;
    for (int64_t ix = ix0; ix < ix1; ++ix) {
      double px = (double(ix) + 0.5) * g;
      if (!top.contains(px, py)) continue;
      ++in_top;
      if (base.contains(px, py)) ++in_both;
    }
  }
  if (in_top == 0) return 0.0;
  return double(in_both) / double(in_top);
}

std::optional<Vec2> project(const Camera& cam, const Vec3& world_point) {
  double x0 = cam.window_center.x - cam.window_w * 0.5;
  double y1 = cam.window_center.y + cam.window_h * 0.5;
  double px = (world_point.x - x0) / cam.window_w * cam.res_w;
  double py = (y1 - world_point.y) / cam.window_h * cam.res_h;
  if (px < 0 || px >= cam.res_w || py < 0 || py >= cam.res_h) return std::nullopt;
  return Vec2{px, py};
}

}  // namespace dsk
