#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/instance.hpp"
#include "core/render.hpp"

namespace dsk {

struct AnnotationRow {
  std::string task;
  std::string subtask;
  std::string step_label;
  bool operator==(const AnnotationRow&) const = default;
};

struct EpisodeMeta {
  std::string task;
  std::string level;
  uint64_t seed = 0;
  std::string split;
  std::vector<PromptSegment> prompt;
  std::string predicates;  // canonical tree text
  bool success = false;
  int length = 0;
};

struct EpisodeRecord {
  EpisodeMeta meta;
  std::vector<std::array<float, 7>> actions;
  std::vector<float> rewards;
  std::vector<uint8_t> success_flags;
  std::vector<Image> frames_base;
  std::vector<Image> frames_hand;
  std::vector<std::vector<BoxLabel>> boxes;  // one list per step
  std::vector<AnnotationRow> annotations;
  std::vector<int> keystep_indices;
  std::vector<Image> keystep_images;
  std::vector<Image> prompt_assets;
  std::vector<Camera> cameras;

  // invariant checks shared by the writer and `inspect`
  void validate() const;  // throws Errc::integrity
};

bool records_equal(const EpisodeRecord& a, const EpisodeRecord& b);

// Binary PPM (P6), canonical header "P6\n<w> <h>\n255\n".
void write_ppm(const std::string& path, const Image& im);
Image read_ppm(const std::string& path);

// CSKT tensor container: "CSKT" | dtype u8 (0 f32, 1 u8) | rank u8 |
// reserved u16 = 0 | dims u32[rank] LE | row-major payload LE.
void write_cskt_f32(const std::string& path, const std::vector<uint32_t>& dims,
                    const float* data);
void write_cskt_u8(const std::string& path, const std::vector<uint32_t>& dims,
                   const uint8_t* data);

struct Tensor {
  int dtype = 0;  // 0 f32, 1 u8
  std::vector<uint32_t> dims;
  std::vector<uint8_t> payload;
  size_t elements() const;
};
Tensor read_cskt(const std::string& path);

// Episode directory layout: meta.json, actions.cskt, rewards.cskt,
// success.cskt, frames/{base,hand}/%06d.ppm, boxes.jsonl, annotations.jsonl,
// keysteps.json + keysteps/%02d.ppm, prompt_assets/%02d.ppm, cameras.json.
void write_episode(const std::string& dir, const EpisodeRecord& rec);
EpisodeRecord read_episode(const std::string& dir);

}  // namespace dsk
