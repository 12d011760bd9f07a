#pragma once

#include <string>
#include <vector>

#include "core/instance.hpp"
#include "core/rng.hpp"

namespace dsk {

struct TaskInfo {
  TaskId id;
  bool language_only_supported = true;
};

// The full 33-task menu: 12 L0, 15 L1, 6 L2.
const std::vector<TaskInfo>& task_list();
const TaskInfo& find_task(const std::string& name);

// Deterministic in (task, seed, split). Renders prompt assets eagerly and
// throws Errc::sampler when rejection sampling cannot place the scene.
TaskInstance instantiate(const TaskId& id, uint64_t seed, Split split);
TaskInstance instantiate(const std::string& name, uint64_t seed, Split split);

struct PromptDoc {
  std::vector<PromptSegment> segments;
  // Flat text with image placeholders resolved (descriptions in language-only
  // mode, markers otherwise).
  std::string text;
};

// language_only substitutes object/texture images with simple descriptions
// and throws Errc::unsupported for the keystep-dependent tasks.
PromptDoc render_prompt(const TaskInstance& inst, bool language_only);

// Best-effort flat text (for annotations/metadata); never throws.
std::string prompt_text(const TaskInstance& inst);

struct NovelBinding {
  std::string word;
  std::string meaning;  // taller / shorter / larger / smaller, or a noun slot
};

// Draws a made-up word from the fixed menus plus the attribute it stands for.
NovelBinding novel_word_binding(bool adjective, Rng& rng);

// Grid scenes: the occupant one grid cell away. Throws Errc::internal if the
// sampler guarantee is violated.
std::string neighbour_of(const WorldState& s, const std::string& obj,
                         const std::string& direction);

}  // namespace dsk
