#pragma once

#include <string>
#include <vector>

#include "core/catalog.hpp"
#include "core/image.hpp"
#include "core/world.hpp"

namespace dsk {

struct BoxLabel {
  std::string camera;
  std::string object;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // pixel AABB of the projected footprint
  bool visible = false;
};

struct RenderOutput {
  Image image;
  std::vector<BoxLabel> boxes;
};

Camera base_camera();
Camera hand_camera();

// Flat-shaded orthographic raster, painter's order by top-face height.
// Deterministic: identical states yield byte-identical images.
Image render_frame(const WorldState& state, const Camera& cam);

// Frame plus per-object boxes and visibility (occlusion checked against the
// painter order at box-center samples).
RenderOutput render_full(const WorldState& state, const Camera& cam);

std::vector<BoxLabel> bounding_boxes(const WorldState& state, const Camera& cam);

// Prompt assets.
Image render_object_image(const Shape& shape, const std::string& texture);
Image render_texture_image(const std::string& texture);

}  // namespace dsk
