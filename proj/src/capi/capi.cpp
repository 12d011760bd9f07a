#include "deskskills/deskskills.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "core/config.hpp"
#include "core/env.hpp"
#include "core/episode.hpp"
#include "core/error.hpp"
#include "core/harness.hpp"
#include "core/render.hpp"
#include "core/runner.hpp"
#include "core/solvers.hpp"
#include "core/tasks.hpp"
#include "json.hpp"

namespace {

thread_local std::string g_last_error;

dsk_status code_of(const dsk::Error& e) {
  switch (e.code()) {
    case dsk::Errc::invalid_arg: return DSK_ERR_INVALID_ARG;
    case dsk::Errc::not_found: return DSK_ERR_NOT_FOUND;
    case dsk::Errc::sampler: return DSK_ERR_SAMPLER;
    case dsk::Errc::integrity: return DSK_ERR_INTEGRITY;
    case dsk::Errc::protocol: return DSK_ERR_PROTOCOL;
    case dsk::Errc::io: return DSK_ERR_IO;
    case dsk::Errc::planning: return DSK_ERR_PLANNING;
    case dsk::Errc::unsupported: return DSK_ERR_UNSUPPORTED;
    case dsk::Errc::internal: return DSK_ERR_INTERNAL;
  }
  return DSK_ERR_INTERNAL;
}

template <class Fn>
dsk_status guarded(Fn&& fn) {
  try {
    fn();
    return DSK_OK;
  } catch (const dsk::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DSK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DSK_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct dsk_env {
  dsk::TaskInstance instance;
  std::unique_ptr<dsk::Env> env;
};

struct dsk_oracle {
  std::unique_ptr<dsk::OraclePolicy> oracle;
};

extern "C" {

const char* dsk_version(void) { return "0.1.0"; }

const char* dsk_last_error(void) { return g_last_error.c_str(); }

void dsk_string_free(char* s) { std::free(s); }

dsk_status dsk_load_config(const char* path) {
  return guarded([&] {
    if (!path) dsk::fail(dsk::Errc::invalid_arg, "null path");
    dsk::load_config_file(path);
  });
}

int dsk_task_count(void) { return int(dsk::task_list().size()); }

dsk_status dsk_task_name(int index, const char** out_name) {
  return guarded([&] {
    const auto& list = dsk::task_list();
    if (!out_name || index < 0 || index >= int(list.size()))
      dsk::fail(dsk::Errc::invalid_arg, "bad task index");
    *out_name = list[size_t(index)].id.name.c_str();
  });
}

dsk_status dsk_task_level(int index, const char** out_level) {
  return guarded([&] {
    const auto& list = dsk::task_list();
    if (!out_level || index < 0 || index >= int(list.size()))
      dsk::fail(dsk::Errc::invalid_arg, "bad task index");
    *out_level = dsk::level_name(list[size_t(index)].id.level);
  });
}

dsk_status dsk_task_language_only(int index, int* out_supported) {
  return guarded([&] {
    const auto& list = dsk::task_list();
    if (!out_supported || index < 0 || index >= int(list.size()))
      dsk::fail(dsk::Errc::invalid_arg, "bad task index");
    *out_supported = list[size_t(index)].language_only_supported ? 1 : 0;
  });
}

dsk_status dsk_env_create(const char* task, uint64_t seed, const char* split, dsk_env** out) {
  return guarded([&] {
    if (!task || !split || !out) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    auto handle = std::make_unique<dsk_env>();
    handle->instance = dsk::instantiate(task, seed, dsk::parse_split(split));
    handle->env = std::make_unique<dsk::Env>(handle->instance);
    *out = handle.release();
  });
}

void dsk_env_destroy(dsk_env* env) { delete env; }

dsk_status dsk_env_reset(dsk_env* env) {
  return guarded([&] {
    if (!env) dsk::fail(dsk::Errc::invalid_arg, "null env");
    env->env->reset();
  });
}

dsk_status dsk_env_step(dsk_env* env, const double action[7], double* out_reward,
                        int* out_success, int* out_done) {
  return guarded([&] {
    if (!env || !action) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    std::array<double, 7> a;
    for (int i = 0; i < 7; ++i) a[size_t(i)] = action[i];
    dsk::Env::StepResult r = env->env->step(dsk::Action::from_array(a));
    if (out_reward) *out_reward = r.reward;
    if (out_success) *out_success = r.success ? 1 : 0;
    if (out_done) *out_done = r.done ? 1 : 0;
  });
}

int64_t dsk_env_step_count(const dsk_env* env) {
  return env ? env->env->state().step_count : -1;
}

dsk_status dsk_env_prompt(const dsk_env* env, int language_only, char** out_json) {
  return guarded([&] {
    if (!env || !out_json) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    dsk::PromptDoc doc = dsk::render_prompt(env->instance, language_only != 0);
    nlohmann::json j;
    j["text"] = doc.text;
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : doc.segments) {
      nlohmann::json js;
      switch (s.type) {
        case dsk::PromptSegment::Type::text: js["type"] = "text"; js["text"] = s.text; break;
        case dsk::PromptSegment::Type::obj_image: js["type"] = "obj_image"; js["ref"] = s.ref; break;
        case dsk::PromptSegment::Type::tex_image: js["type"] = "tex_image"; js["ref"] = s.ref; break;
        case dsk::PromptSegment::Type::keystep: js["type"] = "keystep"; js["ref"] = s.ref; break;
        case dsk::PromptSegment::Type::scene_image: js["type"] = "scene_image"; js["ref"] = s.ref; break;
      }
      if (s.asset_index >= 0) js["asset_index"] = s.asset_index;
      segs.push_back(js);
    }
    j["segments"] = segs;
    *out_json = dup_string(j.dump(2));
  });
}

dsk_status dsk_oracle_create(dsk_env* env, dsk_oracle** out) {
  return guarded([&] {
    if (!env || !out) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    auto handle = std::make_unique<dsk_oracle>();
    handle->oracle = std::make_unique<dsk::OraclePolicy>(env->instance);
    *out = handle.release();
  });
}

void dsk_oracle_destroy(dsk_oracle* oracle) { delete oracle; }

dsk_status dsk_oracle_act(dsk_oracle* oracle, dsk_env* env, double out_action[7],
                          int* out_done) {
  return guarded([&] {
    if (!oracle || !env || !out_action) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    dsk::OraclePolicy::Result r = oracle->oracle->act(*env->env);
    if (r.gave_up) dsk::fail(dsk::Errc::planning, "oracle gave up: " + r.fail_reason);
    auto a = r.action.as_array();
    for (int i = 0; i < 7; ++i) out_action[i] = a[size_t(i)];
    if (out_done) *out_done = r.tree_done ? 1 : 0;
  });
}

dsk_status dsk_generate(const char* tasks, uint64_t seed_lo, uint64_t seed_hi,
                        const char* split, const char* out_dir, int workers, char** out_json) {
  return guarded([&] {
    if (!tasks || !split || !out_dir) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    dsk::GenReport rep = dsk::generate(dsk::expand_task_selector(tasks), seed_lo, seed_hi,
                                       dsk::parse_split(split), out_dir, workers);
    if (out_json) *out_json = dup_string(dsk::report_to_json(rep));
  });
}

dsk_status dsk_evaluate(const char* policy, const char* tasks, uint64_t seed_lo,
                        uint64_t seed_hi, const char* split, int workers,
                        const char* record_dir, const char* format, char** out_text) {
  return guarded([&] {
    if (!policy || !tasks || !split) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    dsk::EvalOptions opts;
    opts.tasks = dsk::expand_task_selector(tasks);
    opts.seed_lo = seed_lo;
    opts.seed_hi = seed_hi;
    opts.split = dsk::parse_split(split);
    opts.workers = workers;
    if (record_dir) opts.record_dir = record_dir;
    dsk::Metrics m = dsk::evaluate(policy, opts);
    std::string fmt = format ? format : "table";
    std::string text = fmt == "json" ? dsk::metrics_to_json(m) : dsk::metrics_to_table(m);
    if (out_text) *out_text = dup_string(text);
  });
}

dsk_status dsk_solve(const char* task, uint64_t seed, const char* split,
                     const char* record_dir, char** out_json) {
  return guarded([&] {
    if (!task || !split) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    dsk::TaskInstance inst = dsk::instantiate(task, seed, dsk::parse_split(split));
    dsk::OracleRunner oracle;
    dsk::RunOptions ro;
    ro.record = record_dir != nullptr;
    dsk::RunResult r = dsk::run_episode(inst, oracle, ro);
    if (record_dir) {
      std::string dir = std::string(record_dir) + "/traj_" + std::to_string(seed);
      dsk::write_episode(dir, r.record);
    }
    nlohmann::json j;
    j["task"] = task;
    j["seed"] = seed;
    j["split"] = split;
    j["success"] = r.success;
    j["steps"] = r.steps;
    j["total_reward"] = r.total_reward;
    nlohmann::json kinds = nlohmann::json::array();
    for (const auto& k : r.solver_kinds) kinds.push_back(k);
    j["solvers"] = kinds;
    if (!r.fail_reason.empty()) j["fail_reason"] = r.fail_reason;
    if (out_json) *out_json = dup_string(j.dump(2));
  });
}

dsk_status dsk_inspect(const char* dir, char** out_json) {
  return guarded([&] {
    if (!dir) dsk::fail(dsk::Errc::invalid_arg, "null dir");
    dsk::InspectReport rep = dsk::inspect_dataset(dir);
    if (out_json) *out_json = dup_string(dsk::inspect_to_json(rep));
    if (!rep.errors.empty())
      dsk::fail(dsk::Errc::integrity, std::to_string(rep.errors.size()) +
                                          " episode(s) failed integrity checks");
  });
}

dsk_status dsk_stats(const char* dir, char** out_json) {
  return guarded([&] {
    if (!dir) dsk::fail(dsk::Errc::invalid_arg, "null dir");
    std::string s = dsk::stats_json(dir);
    if (out_json) *out_json = dup_string(s);
  });
}

dsk_status dsk_render(const char* task, uint64_t seed, const char* split, const char* out_dir) {
  return guarded([&] {
    if (!task || !split || !out_dir) dsk::fail(dsk::Errc::invalid_arg, "null argument");
    dsk::TaskInstance inst = dsk::instantiate(task, seed, dsk::parse_split(split));
    std::filesystem::create_directories(std::string(out_dir) + "/prompt_assets");
    dsk::WorldState s = dsk::reset_world(inst.initial_state);
    dsk::write_ppm(std::string(out_dir) + "/base.ppm",
                   dsk::render_frame(s, dsk::base_camera()));
    dsk::write_ppm(std::string(out_dir) + "/hand.ppm",
                   dsk::render_frame(s, dsk::hand_camera()));
    char name[48];
    for (size_t i = 0; i < inst.assets.size(); ++i) {
      std::snprintf(name, sizeof name, "/prompt_assets/%02d.ppm", int(i));
      dsk::write_ppm(std::string(out_dir) + name, inst.assets[i].image);
    }
  });
}

dsk_status dsk_policy_serve(const char* kind) {
  return guarded([&] {
    if (!kind) dsk::fail(dsk::Errc::invalid_arg, "null kind");
    dsk::serve_policy(kind);
  });
}

}  // extern "C"
