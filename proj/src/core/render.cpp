#include "core/render.hpp"

#include <algorithm>
#include <cmath>

#include "core/config.hpp"

namespace dsk {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

constexpr Rgb kTable{226, 224, 216};
constexpr Rgb kBeam{70, 66, 60};
constexpr Rgb kEeOff{72, 72, 80};
constexpr Rgb kEeOn{36, 130, 210};
constexpr Rgb kGoalPending{160, 160, 160};
constexpr Rgb kGoalActive{52, 190, 52};
constexpr Rgb kGoalDone{226, 212, 50};

struct View {
  double x0, y1, sx, sy;  // world->pixel: px = (wx-x0)*sx, py = (y1-wy)*sy
  int w, h;

  double px_of(double wx) const { return (wx - x0) * sx; }
  double py_of(double wy) const { return (y1 - wy) * sy; }
  double wx_of(int px) const { return x0 + (px + 0.5) / sx; }
  double wy_of(int py) const { return y1 - (py + 0.5) / sy; }
};

View make_view(const WorldState& s, const Camera& cam) {
  Vec2 center = cam.window_center;
  if (cam.follows_ee) center = {s.ee.pose.position.x, s.ee.pose.position.y};
  View v;
  v.w = cam.res_w;
  v.h = cam.res_h;
  v.x0 = center.x - cam.window_w / 2;
  v.y1 = center.y + cam.window_h / 2;
  v.sx = cam.res_w / cam.window_w;
  v.sy = cam.res_h / cam.window_h;
  return v;
}

Rgb texture_color(const TextureDef& tex, double lx, double ly) {
  if (!tex.checker) return {tex.rgb[0], tex.rgb[1], tex.rgb[2]};
  int cell = int(std::floor(lx / 0.01)) + int(std::floor(ly / 0.01));
  bool alt = (cell & 1) != 0;
  const auto& c = alt ? tex.rgb2 : tex.rgb;
  return {c[0], c[1], c[2]};
}

void fill_footprint(Image& im, std::vector<uint16_t>& idbuf, const View& v,
                    const WorldObject& o, uint16_t id) {
  const TextureDef& tex = catalog().texture(o.texture);
  Footprint fp = footprint_of(o.shape, o.pose);
  double bx0, by0, bx1, by1;
  fp.bounds(bx0, by0, bx1, by1);
  int px0 = std::max(0, int(std::floor(v.px_of(bx0))) - 1);
  int px1 = std::min(v.w - 1, int(std::ceil(v.px_of(bx1))) + 1);
  int py0 = std::max(0, int(std::floor(v.py_of(by1))) - 1);
  int py1 = std::min(v.h - 1, int(std::ceil(v.py_of(by0))) + 1);
  Quat inv = o.pose.orientation.conjugate();
  for (int py = py0; py <= py1; ++py) {
    double wy = v.wy_of(py);
    for (int px = px0; px <= px1; ++px) {
      double wx = v.wx_of(px);
      if (!fp.contains(wx, wy)) continue;
      Vec3 local = inv.rotate(Vec3{wx, wy, o.pose.position.z} - o.pose.position);
      Rgb c = texture_color(tex, local.x, local.y);
      im.set(px, py, c.r, c.g, c.b);
      idbuf[size_t(py) * v.w + px] = id;
    }
  }
}

void fill_circle(Image& im, const View& v, double cx, double cy, double r, Rgb c) {
  int px0 = std::max(0, int(std::floor(v.px_of(cx - r))) - 1);
  int px1 = std::min(v.w - 1, int(std::ceil(v.px_of(cx + r))) + 1);
  int py0 = std::max(0, int(std::floor(v.py_of(cy + r))) - 1);
  int py1 = std::min(v.h - 1, int(std::ceil(v.py_of(cy - r))) + 1);
  for (int py = py0; py <= py1; ++py) {
    double wy = v.wy_of(py);
    for (int px = px0; px <= px1; ++px) {
      double wx = v.wx_of(px);
      double dx = wx - cx, dy = wy - cy;
      if (dx * dx + dy * dy <= r * r) im.set(px, py, c.r, c.g, c.b);
    }
  }
}

void fill_segment(Image& im, const View& v, Vec3 a, Vec3 b, double width, Rgb c) {
  double x0 = std::min(a.x, b.x) - width, x1 = std::max(a.x, b.x) + width;
  double y0 = std::min(a.y, b.y) - width, y1 = std::max(a.y, b.y) + width;
  int px0 = std::max(0, int(std::floor(v.px_of(x0))));
  int px1 = std::min(v.w - 1, int(std::ceil(v.px_of(x1))));
  int py0 = std::max(0, int(std::floor(v.py_of(y1))));
  int py1 = std::min(v.h - 1, int(std::ceil(v.py_of(y0))));
  Vec3 ab = b - a;
  double len2 = ab.dot(ab);
  for (int py = py0; py <= py1; ++py) {
    double wy = v.wy_of(py);
    for (int px = px0; px <= px1; ++px) {
      double wx = v.wx_of(px);
      Vec3 p{wx, wy, 0};
      double t = len2 > 1e-12 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      Vec3 q = a + ab * t;
      double dx = wx - q.x, dy = wy - q.y;
      if (dx * dx + dy * dy <= width * width) im.set(px, py, c.r, c.g, c.b);
    }
  }
}

RenderOutput render_impl(const WorldState& s, const Camera& cam, bool want_boxes) {
  View v = make_view(s, cam);
  RenderOutput out;
  out.image = Image::filled(v.w, v.h, kTable.r, kTable.g, kTable.b);
  std::vector<uint16_t> idbuf(size_t(v.w) * v.h, 0xffff);

  if (s.scale) {
    int li = s.find(s.scale->left_pan), ri = s.find(s.scale->right_pan);
    if (li >= 0 && ri >= 0) {
      fill_segment(out.image, v, s.objects[li].pose.position, s.objects[ri].pose.position,
                   0.008, kBeam);
      fill_circle(out.image, v, s.scale->pivot.x, s.scale->pivot.y, 0.018, kBeam);
    }
  }

  std::vector<int> order(s.objects.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return s.objects[a].top_z() < s.objects[b].top_z(); });
  for (int i : order) fill_footprint(out.image, idbuf, v, s.objects[i], uint16_t(i));

  for (const auto& g : s.goals) {
    Rgb c = g.status == TraceGoal::Status::active ? kGoalActive
            : g.status == TraceGoal::Status::done ? kGoalDone
                                                  : kGoalPending;
    fill_circle(out.image, v, g.position.x, g.position.y, g.radius, c);
  }

  fill_circle(out.image, v, s.ee.pose.position.x, s.ee.pose.position.y, config().ee_radius,
              s.ee.suction_on ? kEeOn : kEeOff);

  if (want_boxes) {
    for (size_t i = 0; i < s.objects.size(); ++i) {
      const WorldObject& o = s.objects[i];
      Footprint fp = footprint_of(o.shape, o.pose);
      double bx0, by0, bx1, by1;
      fp.bounds(bx0, by0, bx1, by1);
      BoxLabel box;
      box.camera = cam.id;
      box.object = o.id;
      box.x0 = v.px_of(bx0);
      box.x1 = v.px_of(bx1);
      box.y0 = v.py_of(by1);
      box.y1 = v.py_of(by0);
      bool in_frame = box.x1 > 0 && box.x0 < v.w && box.y1 > 0 && box.y0 < v.h;
      bool seen = false;
      if (in_frame) {
        double cx = (box.x0 + box.x1) / 2, cy = (box.y0 + box.y1) / 2;
        double qx = (box.x1 - box.x0) / 4, qy = (box.y1 - box.y0) / 4;
        const double sample[5][2] = {
            {cx, cy}, {cx - qx, cy - qy}, {cx + qx, cy - qy}, {cx - qx, cy + qy}, {cx + qx, cy + qy}};
        for (const auto& sp : sample) {
          int px = int(sp[0]), py = int(sp[1]);
          if (px < 0 || px >= v.w || py < 0 || py >= v.h) continue;
          if (idbuf[size_t(py) * v.w + px] == i) seen = true;
        }
      }
      box.visible = seen;
      out.boxes.push_back(box);
    }
  }
  return out;
}

}  // namespace

Camera base_camera() {
  Camera c;
  c.id = "base";
  c.window_center = {0, 0};
  c.window_w = c.window_h = config().base_cam_window;
  c.res_w = c.res_h = config().base_cam_res;
  c.follows_ee = false;
  return c;
}

Camera hand_camera() {
  Camera c;
  c.id = "hand";
  c.window_center = {0, 0};
  c.window_w = c.window_h = config().hand_cam_window;
  c.res_w = c.res_h = config().hand_cam_res;
  c.follows_ee = true;
  return c;
}

Image render_frame(const WorldState& state, const Camera& cam) {
  return render_impl(state, cam, false).image;
}

RenderOutput render_full(const WorldState& state, const Camera& cam) {
  return render_impl(state, cam, true);
}

std::vector<BoxLabel> bounding_boxes(const WorldState& state, const Camera& cam) {
  return render_impl(state, cam, true).boxes;
}

Image render_object_image(const Shape& shape, const std::string& texture) {
  WorldState s;
  WorldObject o;
  o.id = "swatch";
  o.shape = shape;
  o.texture = texture;
  o.pose = {{0, 0, world_half_height(shape, Quat::identity())}, Quat::identity()};
  s.objects.push_back(o);
  s.supporter = {kSupportTable};
  s.ee.pose.position = {10, 10, 1};  // out of frame
  Camera cam;
  cam.id = "obj";
  cam.window_center = {0, 0};
  cam.window_w = cam.window_h = std::max(0.12, 3.0 * shape.bounding_radius());
  cam.res_w = cam.res_h = 96;
  return render_frame(s, cam);
}

Image render_texture_image(const std::string& texture) {
  const TextureDef& tex = catalog().texture(texture);
  Image im = Image::filled(64, 64, 0, 0, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      bool alt = tex.checker && ((x / 8 + y / 8) & 1);
      const auto& c = alt ? tex.rgb2 : tex.rgb;
      im.set(x, y, c[0], c[1], c[2]);
    }
  return im;
}

}  // namespace dsk
