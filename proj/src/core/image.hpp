#pragma once

#include <cstdint>
#include <vector>

namespace dsk {

// Plain RGB8 raster, row-major from the top-left.
struct Image {
  int w = 0, h = 0;
  std::vector<uint8_t> rgb;

  static Image filled(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
    Image im;
    im.w = w;
    im.h = h;
    im.rgb.resize(size_t(w) * h * 3);
    for (size_t i = 0; i < im.rgb.size(); i += 3) {
      im.rgb[i] = r;
      im.rgb[i + 1] = g;
      im.rgb[i + 2] = b;
    }
    return im;
  }

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    size_t i = (size_t(y) * w + x) * 3;
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  }

  bool operator==(const Image& o) const { return w == o.w && h == o.h && rgb == o.rgb; }
};

}  // namespace dsk
