/* DeskSkills C API: a deterministic tabletop manipulation benchmark engine.
 *
 * All functions return DSK_OK on success; on failure they return an error
 * code and dsk_last_error() describes the problem (thread-local). Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with dsk_string_free().
 */
#ifndef DESKSKILLS_H
#define DESKSKILLS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsk_status {
  DSK_OK = 0,
  DSK_ERR_INVALID_ARG = 1,
  DSK_ERR_NOT_FOUND = 2,
  DSK_ERR_SAMPLER = 3,
  DSK_ERR_INTEGRITY = 4,
  DSK_ERR_PROTOCOL = 5,
  DSK_ERR_IO = 6,
  DSK_ERR_PLANNING = 7,
  DSK_ERR_UNSUPPORTED = 8,
  DSK_ERR_INTERNAL = 9
} dsk_status;

const char* dsk_version(void);
const char* dsk_last_error(void);
void dsk_string_free(char* s);

/* Applies config overrides from a JSON file (also honoured automatically via
 * the DESKSKILLS_CONFIG environment variable). */
dsk_status dsk_load_config(const char* path);

/* ---- task menu -------------------------------------------------------- */

int dsk_task_count(void);
dsk_status dsk_task_name(int index, const char** out_name);
dsk_status dsk_task_level(int index, const char** out_level);
dsk_status dsk_task_language_only(int index, int* out_supported);

/* ---- environment handle ------------------------------------------------ */

typedef struct dsk_env dsk_env;

/* split: "train" | "test_objects" | "test_textures" */
dsk_status dsk_env_create(const char* task, uint64_t seed, const char* split, dsk_env** out);
void dsk_env_destroy(dsk_env* env);
dsk_status dsk_env_reset(dsk_env* env);

/* action layout: [dx, dy, dz, droll, dpitch, dyaw, grip] */
dsk_status dsk_env_step(dsk_env* env, const double action[7], double* out_reward,
                        int* out_success, int* out_done);
int64_t dsk_env_step_count(const dsk_env* env);

/* Prompt as JSON; language_only != 0 substitutes image segments with object
 * descriptions and fails with DSK_ERR_UNSUPPORTED for keystep-bound tasks. */
dsk_status dsk_env_prompt(const dsk_env* env, int language_only, char** out_json);

/* ---- scripted oracle over an environment ------------------------------- */

typedef struct dsk_oracle dsk_oracle;

dsk_status dsk_oracle_create(dsk_env* env, dsk_oracle** out);
void dsk_oracle_destroy(dsk_oracle* oracle);
/* Emits the next expert action for the env's current state. out_done is set
 * once the task tree is solved. */
dsk_status dsk_oracle_act(dsk_oracle* oracle, dsk_env* env, double out_action[7],
                          int* out_done);

/* ---- batch operations --------------------------------------------------- */

/* tasks selector: "all", "L0"/"L1"/"L2", or a comma-separated name list. */
dsk_status dsk_generate(const char* tasks, uint64_t seed_lo, uint64_t seed_hi,
                        const char* split, const char* out_dir, int workers, char** out_json);

/* policy: "oracle" | "random" | "zero" | "cmd:<command>".
 * format: "table" | "json". record_dir may be NULL. */
dsk_status dsk_evaluate(const char* policy, const char* tasks, uint64_t seed_lo,
                        uint64_t seed_hi, const char* split, int workers,
                        const char* record_dir, const char* format, char** out_text);

/* Runs the oracle on one episode; record_dir may be NULL. */
dsk_status dsk_solve(const char* task, uint64_t seed, const char* split,
                     const char* record_dir, char** out_json);

dsk_status dsk_inspect(const char* dir, char** out_json);
dsk_status dsk_stats(const char* dir, char** out_json);

/* Writes initial-state frames and prompt assets for one episode. */
dsk_status dsk_render(const char* task, uint64_t seed, const char* split, const char* out_dir);

/* Serves the line-delimited policy protocol on stdin/stdout until EOF.
 * kind: "oracle" | "random" | "zero". */
dsk_status dsk_policy_serve(const char* kind);

#ifdef __cplusplus
}
#endif

#endif /* DESKSKILLS_H */
