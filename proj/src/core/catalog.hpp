#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/geom.hpp"
#include "core/rng.hpp"

namespace dsk {

struct ObjectTemplate {
  std::string name;
  std::string display;
  ShapeKind shape = ShapeKind::box;
  // sampling ranges; unused dimensions stay zero
  double hx_lo = 0, hx_hi = 0, hy_lo = 0, hy_hi = 0, hz_lo = 0, hz_hi = 0;
  double r_lo = 0, r_hi = 0, h_lo = 0, h_hi = 0;
  std::string tie;  // "", "xy" or "xyz": dimensions locked together
  bool container = false;
  bool fixture = false;

  Shape sample(Rng& rng) const;
  Shape nominal() const;  // midpoint of every range, for prompt renders
};

struct TextureDef {
  std::string name;
  std::string display;
  std::array<uint8_t, 3> rgb{128, 128, 128};
  std::array<uint8_t, 3> rgb2{255, 255, 255};
  bool checker = false;
};

struct Catalog {
  std::vector<ObjectTemplate> objects;   // manipulables, subject to the split
  std::vector<ObjectTemplate> fixtures;  // plates/trays/areas, shared across splits
  std::vector<TextureDef> textures;

  const ObjectTemplate& object(const std::string& name) const;
  const ObjectTemplate& fixture(const std::string& name) const;
  const TextureDef& texture(const std::string& name) const;
};

Catalog parse_catalog(const std::string& json_text);

// The embedded default catalog.
const Catalog& catalog();

struct CatalogSplit {
  std::vector<std::string> train_objects, test_objects;
  std::vector<std::string> train_textures, test_textures;
};

// Deterministic 80/20 partition of manipulable templates and textures.
CatalogSplit catalog_split(const Catalog& cat, uint64_t seed);

// The fixed split every task instance uses (held-out names stay held out
// across the whole dataset).
const CatalogSplit& default_split();

}  // namespace dsk
