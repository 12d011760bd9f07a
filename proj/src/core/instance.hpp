#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/predicates.hpp"
#include "core/world.hpp"

namespace dsk {

enum class Level { L0, L1, L2 };

enum class Split { train, test_objects, test_textures };

const char* level_name(Level l);
const char* split_name(Split s);
Level parse_level(const std::string& s);
Split parse_split(const std::string& s);

struct TaskId {
  Level level = Level::L0;
  std::string name;
};

struct PromptSegment {
  enum class Type { text, obj_image, tex_image, keystep, scene_image };
  Type type = Type::text;
  std::string text;     // text segments
  std::string ref;      // object id, texture name, or keystep tag
  int asset_index = -1; // index into TaskInstance::assets for image segments
};

struct PromptAsset {
  Image image;
  std::string kind;  // "obj" | "tex" | "keystep" | "scene"
  std::string ref;
};

// A fully sampled episode setup. Value type: copy freely across threads.
struct TaskInstance {
  TaskId task;
  uint64_t seed = 0;
  Split split = Split::train;
  WorldState initial_state;
  Predicate tree;
  std::vector<PromptSegment> prompt;
  // Pre-rendered text fallback for prompts whose primary form uses keysteps
  // but that still admit a language description (e.g. stack variants).
  // Empty plus keystep segments in `prompt` means language-only is unsupported.
  std::vector<PromptSegment> prompt_language;
  std::vector<PromptAsset> assets;
  std::map<std::string, std::string> descriptions;  // object id / texture -> phrase
};

}  // namespace dsk
