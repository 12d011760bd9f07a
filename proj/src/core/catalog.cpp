#include "core/catalog.hpp"

#include <algorithm>

#include "catalog_data.hpp"
#include "core/error.hpp"
#include "json.hpp"

namespace dsk {

namespace {

using nlohmann::json;

void read_range(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  lo = v.at(0).get<double>();
  hi = v.at(1).get<double>();
}

ObjectTemplate parse_template(const json& j, bool fixture) {
  ObjectTemplate t;
  t.name = j.at("name").get<std::string>();
  t.display = j.value("display", t.name);
  std::string shape = j.at("shape").get<std::string>();
  if (shape == "box") t.shape = ShapeKind::box;
  else if (shape == "disc") t.shape = ShapeKind::disc;
  else if (shape == "sphere") t.shape = ShapeKind::sphere;
  else fail(Errc::invalid_arg, "unknown shape kind in catalog: " + shape);
  read_range(j, "hx", t.hx_lo, t.hx_hi);
  read_range(j, "hy", t.hy_lo, t.hy_hi);
  read_range(j, "hz", t.hz_lo, t.hz_hi);
  read_range(j, "r", t.r_lo, t.r_hi);
  read_range(j, "h", t.h_lo, t.h_hi);
  t.tie = j.value("tie", "");
  t.container = j.value("container", false);
  t.fixture = fixture;
  return t;
}

}  // namespace

Shape ObjectTemplate::sample(Rng& rng) const {
  switch (shape) {
    case ShapeKind::box: {
      double hx = rng.uniform(hx_lo, hx_hi);
      double hy = tie == "xy" || tie == "xyz" ? hx : rng.uniform(hy_lo, hy_hi);
      double hz = tie == "xyz" ? hx : rng.uniform(hz_lo, hz_hi);
      return Shape::box(hx, hy, hz);
    }
    case ShapeKind::disc:
      return Shape::disc(rng.uniform(r_lo, r_hi), rng.uniform(h_lo, h_hi));
    case ShapeKind::sphere:
      return Shape::sphere(rng.uniform(r_lo, r_hi));
  }
  fail(Errc::internal, "bad template");
}

Shape ObjectTemplate::nominal() const {
  switch (shape) {
    case ShapeKind::box: {
      double hx = (hx_lo + hx_hi) / 2;
      double hy = tie == "xy" || tie == "xyz" ? hx : (hy_lo + hy_hi) / 2;
      double hz = tie == "xyz" ? hx : (hz_lo + hz_hi) / 2;
      return Shape::box(hx, hy, hz);
    }
    case ShapeKind::disc:
      return Shape::disc((r_lo + r_hi) / 2, (h_lo + h_hi) / 2);
    case ShapeKind::sphere:
      return Shape::sphere((r_lo + r_hi) / 2);
  }
  fail(Errc::internal, "bad template");
}

const ObjectTemplate& Catalog::object(const std::string& name) const {
  for (const auto& t : objects)
    if (t.name == name) return t;
  fail(Errc::not_found, "no catalog object: " + name);
}

const ObjectTemplate& Catalog::fixture(const std::string& name) const {
  for (const auto& t : fixtures)
    if (t.name == name) return t;
  fail(Errc::not_found, "no catalog fixture: " + name);
}

const TextureDef& Catalog::texture(const std::string& name) const {
  for (const auto& t : textures)
    if (t.name == name) return t;
  fail(Errc::not_found, "no catalog texture: " + name);
}

Catalog parse_catalog(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(Errc::io, std::string("bad catalog json: ") + e.what());
  }
  Catalog cat;
  for (const auto& o : j.at("objects")) cat.objects.push_back(parse_template(o, false));
  for (const auto& o : j.at("fixtures")) cat.fixtures.push_back(parse_template(o, true));
  for (const auto& t : j.at("textures")) {
    TextureDef td;
    td.name = t.at("name").get<std::string>();
    td.display = t.value("display", td.name);
    auto rgb = t.at("rgb");
    td.rgb = {rgb.at(0).get<uint8_t>(), rgb.at(1).get<uint8_t>(), rgb.at(2).get<uint8_t>()};
    if (t.contains("rgb2")) {
      auto r2 = t.at("rgb2");
      td.rgb2 = {r2.at(0).get<uint8_t>(), r2.at(1).get<uint8_t>(), r2.at(2).get<uint8_t>()};
    }
    td.checker = t.value("pattern", "") == "checker";
    cat.textures.push_back(td);
  }
  if (cat.objects.size() < 4 || cat.textures.size() < 4)
    fail(Errc::invalid_arg, "catalog too small to sample tasks");
  return cat;
}

const Catalog& catalog() {
  static const Catalog cat = parse_catalog(default_catalog_json());
  return cat;
}

CatalogSplit catalog_split(const Catalog& cat, uint64_t seed) {
  CatalogSplit split;
  Rng rng(Rng::hash_mix(seed ^ 0xca7a1099ULL));
  std::vector<std::string> objs;
  for (const auto& t : cat.objects) objs.push_back(t.name);
  rng.shuffle(objs);
  size_t n_train = size_t(0.8 * double(objs.size()));
  split.train_objects.assign(objs.begin(), objs.begin() + n_train);
  split.test_objects.assign(objs.begin() + n_train, objs.end());

  std::vector<std::string> texs;
  for (const auto& t : cat.textures) texs.push_back(t.name);
  rng.shuffle(texs);
  size_t t_train = size_t(0.8 * double(texs.size()));
  split.train_textures.assign(texs.begin(), texs.begin() + t_train);
  split.test_textures.assign(texs.begin() + t_train, texs.end());

  std::sort(split.train_objects.begin(), split.train_objects.end());
  std::sort(split.test_objects.begin(), split.test_objects.end());
  std::sort(split.train_textures.begin(), split.train_textures.end());
  std::sort(split.test_textures.begin(), split.test_textures.end());
  return split;
}

const CatalogSplit& default_split() {
  static const CatalogSplit split = catalog_split(catalog(), 0);
  return split;
}

}  // namespace dsk
