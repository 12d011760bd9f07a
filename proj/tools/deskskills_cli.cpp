// Command-line front end. Talks to the engine exclusively through the C API.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "deskskills/deskskills.h"

namespace {

int die(dsk_status st) {
  std::fprintf(stderr, "error: %s\n", dsk_last_error());
  return int(st);
}

void print_and_free(char* text) {
  if (!text) return;
  std::fputs(text, stdout);
  size_t len = std::string(text).size();
  if (len == 0 || text[len - 1] != '\n') std::fputc('\n', stdout);
  dsk_string_free(text);
}

struct SeedRange {
  uint64_t lo = 0, hi = 0;
};

bool parse_seeds(const std::string& s, SeedRange& out) {
  size_t dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      out.lo = out.hi = std::stoull(s);
    } else {
      out.lo = std::stoull(s.substr(0, dots));
      out.hi = std::stoull(s.substr(dots + 2));
    }
  } catch (...) {
    return false;
  }
  return out.hi >= out.lo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeskSkills: deterministic tabletop manipulation benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with engine constant overrides");

  // list-tasks
  auto* list_cmd = app.add_subcommand("list-tasks", "Print the 33-task menu");

  // gen-data
  std::string gen_tasks = "all", gen_seeds = "0..9", gen_split = "train", gen_out;
  int gen_workers = 1;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate oracle episode directories");
  gen_cmd->add_option("--tasks", gen_tasks, "Task names (csv), a level (L0/L1/L2) or 'all'");
  gen_cmd->add_option("--seeds", gen_seeds, "Seed range a..b or a single seed");
  gen_cmd->add_option("--split", gen_split, "train | test_objects | test_textures");
  gen_cmd->add_option("--out", gen_out, "Output dataset directory")->required();
  gen_cmd->add_option("--workers", gen_workers, "Parallel episode workers");

  // solve
  std::string solve_task, solve_split = "train", solve_record;
  uint64_t solve_seed = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Run the oracle on one episode");
  solve_cmd->add_option("--task", solve_task, "Task name")->required();
  solve_cmd->add_option("--seed", solve_seed, "Episode seed");
  solve_cmd->add_option("--split", solve_split, "train | test_objects | test_textures");
  solve_cmd->add_option("--record", solve_record, "Record the episode under this directory");

  // eval
  std::string eval_policy = "oracle", eval_tasks, eval_level, eval_seeds = "0..19";
  std::string eval_split = "train", eval_format = "table", eval_record;
  int eval_workers = 1;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy over a task suite");
  eval_cmd->add_option("--policy", eval_policy, "oracle | random | zero | cmd:<command>");
  eval_cmd->add_option("--tasks", eval_tasks, "Task names (csv) or 'all'");
  eval_cmd->add_option("--level", eval_level, "Evaluate every task of a level (L0/L1/L2)");
  eval_cmd->add_option("--seeds", eval_seeds, "Seed range a..b");
  eval_cmd->add_option("--split", eval_split, "train | test_objects | test_textures");
  eval_cmd->add_option("--format", eval_format, "table | json");
  eval_cmd->add_option("--record", eval_record, "Also record episodes under this directory");
  eval_cmd->add_option("--workers", eval_workers, "Parallel episode workers");

  // inspect
  std::string inspect_dir;
  auto* inspect_cmd = app.add_subcommand("inspect", "Validate episode directory integrity");
  inspect_cmd->add_option("dir", inspect_dir, "Episode or dataset directory")->required();

  // stats
  std::string stats_dir;
  auto* stats_cmd = app.add_subcommand("stats", "Action ranges and episode length stats");
  stats_cmd->add_option("dir", stats_dir, "Dataset directory")->required();

  // render
  std::string render_task, render_split = "train", render_out;
  uint64_t render_seed = 0;
  auto* render_cmd = app.add_subcommand("render", "Write initial frames and prompt assets");
  render_cmd->add_option("--task", render_task, "Task name")->required();
  render_cmd->add_option("--seed", render_seed, "Episode seed");
  render_cmd->add_option("--split", render_split, "train | test_objects | test_textures");
  render_cmd->add_option("--out", render_out, "Output directory")->required();

  // policy (protocol server; counterpart of eval --policy cmd:...)
  std::string policy_kind = "oracle";
  auto* policy_cmd =
      app.add_subcommand("policy", "Serve a reference policy over the stdio protocol");
  policy_cmd->add_option("--kind", policy_kind, "oracle | random | zero");

  CLI11_PARSE(app, argc, argv);

  if (!config_path.empty()) {
    dsk_status st = dsk_load_config(config_path.c_str());
    if (st != DSK_OK) return die(st);
  }

  if (list_cmd->parsed()) {
    int n = dsk_task_count();
    std::printf("%-6s %-24s %s\n", "level", "task", "language_only");
    for (int i = 0; i < n; ++i) {
      const char *name = nullptr, *level = nullptr;
      int lang = 0;
      if (dsk_task_name(i, &name) != DSK_OK || dsk_task_level(i, &level) != DSK_OK ||
          dsk_task_language_only(i, &lang) != DSK_OK)
        return die(DSK_ERR_INTERNAL);
      std::printf("%-6s %-24s %s\n", level, name, lang ? "yes" : "no");
    }
    return 0;
  }

  if (gen_cmd->parsed()) {
    SeedRange r;
    if (!parse_seeds(gen_seeds, r)) {
      std::fprintf(stderr, "error: bad seed range '%s'\n", gen_seeds.c_str());
      return 2;
    }
    char* out = nullptr;
    dsk_status st = dsk_generate(gen_tasks.c_str(), r.lo, r.hi, gen_split.c_str(),
                                 gen_out.c_str(), gen_workers, &out);
    if (st != DSK_OK) return die(st);
    print_and_free(out);
    return 0;
  }

  if (solve_cmd->parsed()) {
    char* out = nullptr;
    dsk_status st = dsk_solve(solve_task.c_str(), solve_seed, solve_split.c_str(),
                              solve_record.empty() ? nullptr : solve_record.c_str(), &out);
    if (st != DSK_OK) return die(st);
    print_and_free(out);
    return 0;
  }

  if (eval_cmd->parsed()) {
    SeedRange r;
    if (!parse_seeds(eval_seeds, r)) {
      std::fprintf(stderr, "error: bad seed range '%s'\n", eval_seeds.c_str());
      return 2;
    }
    std::string tasks = !eval_level.empty() ? eval_level : eval_tasks;
    if (tasks.empty()) tasks = "all";
    char* out = nullptr;
    dsk_status st = dsk_evaluate(eval_policy.c_str(), tasks.c_str(), r.lo, r.hi,
                                 eval_split.c_str(), eval_workers,
                                 eval_record.empty() ? nullptr : eval_record.c_str(),
                                 eval_format.c_str(), &out);
    if (st != DSK_OK) return die(st);
    print_and_free(out);
    return 0;
  }

  if (inspect_cmd->parsed()) {
    char* out = nullptr;
    dsk_status st = dsk_inspect(inspect_dir.c_str(), &out);
    print_and_free(out);
    if (st != DSK_OK) return die(st);
    return 0;
  }

  if (stats_cmd->parsed()) {
    char* out = nullptr;
    dsk_status st = dsk_stats(stats_dir.c_str(), &out);
    if (st != DSK_OK) return die(st);
    print_and_free(out);
    return 0;
  }

  if (render_cmd->parsed()) {
    dsk_status st =
        dsk_render(render_task.c_str(), render_seed, render_split.c_str(), render_out.c_str());
    if (st != DSK_OK) return die(st);
    std::printf("wrote %s\n", render_out.c_str());
    return 0;
  }

  if (policy_cmd->parsed()) {
    dsk_status st = dsk_policy_serve(policy_kind.c_str());
    if (st != DSK_OK) return die(st);
    return 0;
  }

  return 0;
}
