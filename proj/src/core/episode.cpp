#include "core/episode.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "json.hpp"

namespace dsk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string seg_type_name(PromptSegment::Type t) {
  switch (t) {
    case PromptSegment::Type::text: return "text";
    case PromptSegment::Type::obj_image: return "obj_image";
    case PromptSegment::Type::tex_image: return "tex_image";
    case PromptSegment::Type::keystep: return "keystep";
    case PromptSegment::Type::scene_image: return "scene_image";
  }
  return "text";
}

PromptSegment::Type seg_type_from(const std::string& s) {
  if (s == "text") return PromptSegment::Type::text;
  if (s == "obj_image") return PromptSegment::Type::obj_image;
  if (s == "tex_image") return PromptSegment::Type::tex_image;
  if (s == "keystep") return PromptSegment::Type::keystep;
  if (s == "scene_image") return PromptSegment::Type::scene_image;
  fail(Errc::integrity, "unknown prompt segment type: " + s);
}

json segments_to_json(const std::vector<PromptSegment>& segs) {
  json arr = json::array();
  for (const auto& s : segs) {
    json j;
    j["type"] = seg_type_name(s.type);
    if (!s.text.empty()) j["text"] = s.text;
    if (!s.ref.empty()) j["ref"] = s.ref;
    if (s.asset_index >= 0) j["asset_index"] = s.asset_index;
    arr.push_back(j);
  }
  return arr;
}

std::vector<PromptSegment> segments_from_json(const json& arr) {
  std::vector<PromptSegment> out;
  for (const auto& j : arr) {
    PromptSegment s;
    s.type = seg_type_from(j.at("type").get<std::string>());
    s.text = j.value("text", "");
    s.ref = j.value("ref", "");
    s.asset_index = j.value("asset_index", -1);
    out.push_back(s);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write " + path);
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) fail(Errc::io, "short write on " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot read " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(Errc::integrity, "bad json in " + path + ": " + e.what());
  }
}

std::string frame_path(const std::string& dir, const char* cam, int i) {
  char name[32];
  std::snprintf(name, sizeof name, "/frames/%s/%06d.ppm", cam, i);
  return dir + name;
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}
void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void write_cskt(const std::string& path, uint8_t dtype, const std::vector<uint32_t>& dims,
                const uint8_t* data, size_t elem_size) {
  std::string out;
  out += "CSKT";
  out.push_back(char(dtype));
  out.push_back(char(dims.size()));
  put_u16(out, 0);
  size_t count = 1;
  for (uint32_t d : dims) {
    put_u32(out, d);
    count *= d;
  }
  out.append(reinterpret_cast<const char*>(data), count * elem_size);
  write_file(path, out);
}

}  // namespace

size_t Tensor::elements() const {
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

void write_cskt_f32(const std::string& path, const std::vector<uint32_t>& dims,
                    const float* data) {
  static_assert(sizeof(float) == 4);
  write_cskt(path, 0, dims, reinterpret_cast<const uint8_t*>(data), 4);
}

void write_cskt_u8(const std::string& path, const std::vector<uint32_t>& dims,
                   const uint8_t* data) {
  write_cskt(path, 1, dims, data, 1);
}

Tensor read_cskt(const std::string& path) {
  std::string raw = read_file(path);
  if (raw.size() < 8 || raw.compare(0, 4, "CSKT") != 0)
    fail(Errc::integrity, path + ": bad magic at offset 0");
  Tensor t;
  t.dtype = uint8_t(raw[4]);
  if (t.dtype != 0 && t.dtype != 1) fail(Errc::integrity, path + ": bad dtype at offset 4");
  int rank = uint8_t(raw[5]);
  uint16_t reserved = uint16_t(uint8_t(raw[6])) | uint16_t(uint8_t(raw[7])) << 8;
  if (reserved != 0) fail(Errc::integrity, path + ": reserved field nonzero at offset 6");
  size_t off = 8;
  if (raw.size() < off + size_t(rank) * 4) fail(Errc::integrity, path + ": truncated dims");
  for (int i = 0; i < rank; ++i) {
    uint32_t d = 0;
    for (int b = 0; b < 4; ++b) d |= uint32_t(uint8_t(raw[off + b])) << (8 * b);
    t.dims.push_back(d);
    off += 4;
  }
  size_t elem = t.dtype == 0 ? 4 : 1;
  size_t want = t.elements() * elem;
  if (raw.size() - off != want)
    fail(Errc::integrity, path + ": payload length " + std::to_string(raw.size() - off) +
                              " != expected " + std::to_string(want) + " at offset " +
                              std::to_string(off));
  t.payload.assign(raw.begin() + std::streamoff(off), raw.end());
  return t;
}

void write_ppm(const std::string& path, const Image& im) {
  std::string out = "P6\n" + std::to_string(im.w) + " " + std::to_string(im.h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(im.rgb.data()), im.rgb.size());
  write_file(path, out);
}

Image read_ppm(const std::string& path) {
  std::string raw = read_file(path);
  if (raw.compare(0, 3, "P6\n") != 0) fail(Errc::integrity, path + ": not a P6 ppm");
  size_t pos = 3;
  auto read_int = [&](int& v) {
    while (pos < raw.size() && std::isspace(uint8_t(raw[pos]))) ++pos;
    size_t start = pos;
    while (pos < raw.size() && std::isdigit(uint8_t(raw[pos]))) ++pos;
    if (start == pos) fail(Errc::integrity, path + ": bad ppm header");
    v = std::atoi(raw.substr(start, pos - start).c_str());
  };
  Image im;
  int maxval = 0;
  read_int(im.w);
  read_int(im.h);
  read_int(maxval);
  if (maxval != 255) fail(Errc::integrity, path + ": unsupported maxval");
  ++pos;  // single whitespace after maxval
  size_t want = size_t(im.w) * im.h * 3;
  if (raw.size() - pos != want)
    fail(Errc::integrity, path + ": pixel payload " + std::to_string(raw.size() - pos) +
                              " != expected " + std::to_string(want));
  im.rgb.assign(raw.begin() + std::streamoff(pos), raw.end());
  return im;
}

void EpisodeRecord::validate() const {
  size_t n = actions.size();
  if (rewards.size() != n || success_flags.size() != n)
    fail(Errc::integrity, "episode length mismatch between actions/rewards/success");
  if (frames_base.size() != n || frames_hand.size() != n)
    fail(Errc::integrity, "frame count does not match the action count");
  if (boxes.size() != n || annotations.size() != n)
    fail(Errc::integrity, "boxes/annotations length mismatch");
  for (size_t i = 1; i < success_flags.size(); ++i)
    if (success_flags[i] < success_flags[i - 1])
      fail(Errc::integrity, "success flags are not monotone");
  for (int k : keystep_indices)
    if (k < 0 || size_t(k) >= n) fail(Errc::integrity, "keystep index out of range");
  if (keystep_images.size() != keystep_indices.size())
    fail(Errc::integrity, "keystep images do not match indices");
  if (!success_flags.empty() && bool(success_flags.back()) != meta.success)
    fail(Errc::integrity, "meta success flag disagrees with success trace");
  if (meta.length != int(n)) fail(Errc::integrity, "meta length disagrees with actions");
}

bool records_equal(const EpisodeRecord& a, const EpisodeRecord& b) {
  auto seg_eq = [](const PromptSegment& x, const PromptSegment& y) {
    return x.type == y.type && x.text == y.text && x.ref == y.ref &&
           x.asset_index == y.asset_index;
  };
  if (a.meta.task != b.meta.task || a.meta.level != b.meta.level || a.meta.seed != b.meta.seed ||
      a.meta.split != b.meta.split || a.meta.predicates != b.meta.predicates ||
      a.meta.success != b.meta.success || a.meta.length != b.meta.length)
    return false;
  if (a.meta.prompt.size() != b.meta.prompt.size()) return false;
  for (size_t i = 0; i < a.meta.prompt.size(); ++i)
    if (!seg_eq(a.meta.prompt[i], b.meta.prompt[i])) return false;
  if (a.actions != b.actions || a.rewards != b.rewards || a.success_flags != b.success_flags)
    return false;
  if (!(a.frames_base == b.frames_base) || !(a.frames_hand == b.frames_hand)) return false;
  if (a.keystep_indices != b.keystep_indices) return false;
  if (!(a.keystep_images == b.keystep_images) || !(a.prompt_assets == b.prompt_assets))
    return false;
  if (a.annotations != b.annotations) return false;
  if (a.boxes.size() != b.boxes.size()) return false;
  auto box_eq = [](const BoxLabel& x, const BoxLabel& y) {
    return x.camera == y.camera && x.object == y.object && x.x0 == y.x0 && x.y0 == y.y0 &&
           x.x1 == y.x1 && x.y1 == y.y1 && x.visible == y.visible;
  };
  for (size_t i = 0; i < a.boxes.size(); ++i) {
    if (a.boxes[i].size() != b.boxes[i].size()) return false;
    for (size_t j = 0; j < a.boxes[i].size(); ++j)
      if (!box_eq(a.boxes[i][j], b.boxes[i][j])) return false;
  }
  if (a.cameras.size() != b.cameras.size()) return false;
  for (size_t i = 0; i < a.cameras.size(); ++i) {
    const Camera &x = a.cameras[i], &y = b.cameras[i];
    if (x.id != y.id || x.window_center.x != y.window_center.x ||
        x.window_center.y != y.window_center.y || x.window_w != y.window_w ||
        x.window_h != y.window_h || x.res_w != y.res_w || x.res_h != y.res_h ||
        x.follows_ee != y.follows_ee)
      return false;
  }
  return true;
}

void write_episode(const std::string& dir, const EpisodeRecord& rec) {
  rec.validate();
  fs::create_directories(dir + "/frames/base");
  fs::create_directories(dir + "/frames/hand");
  fs::create_directories(dir + "/keysteps");
  fs::create_directories(dir + "/prompt_assets");

  json meta;
  meta["task"] = rec.meta.task;
  meta["level"] = rec.meta.level;
  meta["seed"] = rec.meta.seed;
  meta["split"] = rec.meta.split;
  meta["prompt"] = segments_to_json(rec.meta.prompt);
  meta["predicates"] = rec.meta.predicates;
  meta["success"] = rec.meta.success;
  meta["length"] = rec.meta.length;
  write_file(dir + "/meta.json", meta.dump(2) + "\n");

  uint32_t n = uint32_t(rec.actions.size());
  std::vector<float> flat(size_t(n) * 7);
  for (uint32_t i = 0; i < n; ++i)
    for (int j = 0; j < 7; ++j) flat[size_t(i) * 7 + j] = rec.actions[i][j];
  write_cskt_f32(dir + "/actions.cskt", {n, 7}, flat.data());
  write_cskt_f32(dir + "/rewards.cskt", {n}, rec.rewards.data());
  write_cskt_u8(dir + "/success.cskt", {n}, rec.success_flags.data());

  for (uint32_t i = 0; i < n; ++i) {
    write_ppm(frame_path(dir, "base", int(i)), rec.frames_base[i]);
    write_ppm(frame_path(dir, "hand", int(i)), rec.frames_hand[i]);
  }

  std::string boxes_out;
  for (uint32_t i = 0; i < n; ++i) {
    json row;
    row["step"] = i;
    json arr = json::array();
    for (const auto& box : rec.boxes[i]) {
      json jb;
      jb["camera"] = box.camera;
      jb["object"] = box.object;
      jb["x0"] = box.x0;
      jb["y0"] = box.y0;
      jb["x1"] = box.x1;
      jb["y1"] = box.y1;
      jb["visible"] = box.visible;
      arr.push_back(jb);
    }
    row["boxes"] = arr;
    boxes_out += row.dump() + "\n";
  }
  write_file(dir + "/boxes.jsonl", boxes_out);

  std::string ann_out;
  for (uint32_t i = 0; i < n; ++i) {
    json row;
    row["step"] = i;
    row["task"] = rec.annotations[i].task;
    row["subtask"] = rec.annotations[i].subtask;
    row["step_label"] = rec.annotations[i].step_label;
    ann_out += row.dump() + "\n";
  }
  write_file(dir + "/annotations.jsonl", ann_out);

  json ks;
  ks["indices"] = rec.keystep_indices;
  json ks_files = json::array();
  char name[32];
  for (size_t i = 0; i < rec.keystep_images.size(); ++i) {
    std::snprintf(name, sizeof name, "keysteps/%02d.ppm", int(i));
    ks_files.push_back(std::string(name));
    write_ppm(dir + "/" + name, rec.keystep_images[i]);
  }
  ks["images"] = ks_files;
  write_file(dir + "/keysteps.json", ks.dump(2) + "\n");

  for (size_t i = 0; i < rec.prompt_assets.size(); ++i) {
    std::snprintf(name, sizeof name, "prompt_assets/%02d.ppm", int(i));
    write_ppm(dir + "/" + name, rec.prompt_assets[i]);
  }

  json cams = json::array();
  for (const auto& c : rec.cameras) {
    json jc;
    jc["id"] = c.id;
    jc["center"] = {c.window_center.x, c.window_center.y};
    jc["window"] = {c.window_w, c.window_h};
    jc["resolution"] = {c.res_w, c.res_h};
    jc["follows_ee"] = c.follows_ee;
    cams.push_back(jc);
  }
  write_file(dir + "/cameras.json", cams.dump(2) + "\n");
}

EpisodeRecord read_episode(const std::string& dir) {
  EpisodeRecord rec;
  json meta = parse_json_file(dir + "/meta.json");
  rec.meta.task = meta.at("task").get<std::string>();
  rec.meta.level = meta.at("level").get<std::string>();
  rec.meta.seed = meta.at("seed").get<uint64_t>();
  rec.meta.split = meta.at("split").get<std::string>();
  rec.meta.prompt = segments_from_json(meta.at("prompt"));
  rec.meta.predicates = meta.at("predicates").get<std::string>();
  rec.meta.success = meta.at("success").get<bool>();
  rec.meta.length = meta.at("length").get<int>();

  Tensor actions = read_cskt(dir + "/actions.cskt");
  if (actions.dtype != 0 || actions.dims.size() != 2 || actions.dims[1] != 7)
    fail(Errc::integrity, dir + "/actions.cskt: expected float32 [N,7]");
  uint32_t n = actions.dims[0];
  const float* af = reinterpret_cast<const float*>(actions.payload.data());
  for (uint32_t i = 0; i < n; ++i) {
    std::array<float, 7> row;
    for (int j = 0; j < 7; ++j) row[j] = af[size_t(i) * 7 + j];
    rec.actions.push_back(row);
  }
  Tensor rewards = read_cskt(dir + "/rewards.cskt");
  if (rewards.dtype != 0 || rewards.dims.size() != 1 || rewards.dims[0] != n)
    fail(Errc::integrity, dir + "/rewards.cskt: expected float32 [N]");
  const float* rf = reinterpret_cast<const float*>(rewards.payload.data());
  rec.rewards.assign(rf, rf + n);
  Tensor succ = read_cskt(dir + "/success.cskt");
  if (succ.dtype != 1 || succ.dims.size() != 1 || succ.dims[0] != n)
    fail(Errc::integrity, dir + "/success.cskt: expected u8 [N]");
  rec.success_flags = succ.payload;

  for (uint32_t i = 0; i < n; ++i) {
    rec.frames_base.push_back(read_ppm(frame_path(dir, "base", int(i))));
    rec.frames_hand.push_back(read_ppm(frame_path(dir, "hand", int(i))));
  }

  auto read_lines = [&](const std::string& path) {
    std::vector<std::string> lines;
    std::string raw = read_file(path);
    size_t pos = 0;
    while (pos < raw.size()) {
      size_t nl = raw.find('\n', pos);
      if (nl == std::string::npos) nl = raw.size();
      if (nl > pos) lines.push_back(raw.substr(pos, nl - pos));
      pos = nl + 1;
    }
    return lines;
  };
  for (const auto& line : read_lines(dir + "/boxes.jsonl")) {
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      fail(Errc::integrity, dir + "/boxes.jsonl: bad line: " + e.what());
    }
    std::vector<BoxLabel> step_boxes;
    for (const auto& jb : row.at("boxes")) {
      BoxLabel b;
      b.camera = jb.at("camera").get<std::string>();
      b.object = jb.at("object").get<std::string>();
      b.x0 = jb.at("x0").get<double>();
      b.y0 = jb.at("y0").get<double>();
      b.x1 = jb.at("x1").get<double>();
      b.y1 = jb.at("y1").get<double>();
      b.visible = jb.at("visible").get<bool>();
      step_boxes.push_back(b);
    }
    rec.boxes.push_back(std::move(step_boxes));
  }
  for (const auto& line : read_lines(dir + "/annotations.jsonl")) {
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      fail(Errc::integrity, dir + "/annotations.jsonl: bad line: " + e.what());
    }
    rec.annotations.push_back(
        {row.at("task").get<std::string>(), row.at("subtask").get<std::string>(),
         row.at("step_label").get<std::string>()});
  }

  json ks = parse_json_file(dir + "/keysteps.json");
  for (const auto& v : ks.at("indices")) rec.keystep_indices.push_back(v.get<int>());
  for (const auto& v : ks.at("images"))
    rec.keystep_images.push_back(read_ppm(dir + "/" + v.get<std::string>()));

  // prompt assets are contiguous indices
  for (int i = 0;; ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "%s/prompt_assets/%02d.ppm", dir.c_str(), i);
    if (!fs::exists(name)) break;
    rec.prompt_assets.push_back(read_ppm(name));
  }

  json cams = parse_json_file(dir + "/cameras.json");
  for (const auto& jc : cams) {
    Camera c;
    c.id = jc.at("id").get<std::string>();
    c.window_center = {jc.at("center").at(0).get<double>(), jc.at("center").at(1).get<double>()};
    c.window_w = jc.at("window").at(0).get<double>();
    c.window_h = jc.at("window").at(1).get<double>();
    c.res_w = jc.at("resolution").at(0).get<int>();
    c.res_h = jc.at("resolution").at(1).get<int>();
    c.follows_ee = jc.at("follows_ee").get<bool>();
    rec.cameras.push_back(c);
  }

  rec.validate();
  return rec;
}

}  // namespace dsk
