/* gaitforge C API. All functions are safe to call from C; every failing call
 * returns a non-zero gf_status and leaves a message for gf_last_error() in
 * the calling thread. Handles are opaque and single-threaded. */
#ifndef GAITFORGE_H
#define GAITFORGE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GF_API __declspec(dllexport)
#else
#define GF_API __attribute__((visibility("default")))
#endif

typedef enum gf_status {
  GF_OK = 0,
  GF_ERR_UNKNOWN_MORPHOLOGY = 1,
  GF_ERR_VALIDATION = 2,
  GF_ERR_DIMENSION_MISMATCH = 3,
  GF_ERR_INVALID_INPUT = 4,
  GF_ERR_NUMERICAL_BLOWUP = 5,
  GF_ERR_NOT_RESET = 6,
  GF_ERR_IO = 7,
  GF_ERR_PROTOCOL = 8,
  GF_ERR_SCHEMA_MISMATCH = 9,
  GF_ERR_EMPTY_REPORT = 10,
  GF_ERR_NULL_ARGUMENT = 100,
  GF_ERR_INTERNAL = 101
} gf_status;

#define GF_MAX_LEGS 6

typedef struct gf_env gf_env;
typedef struct gf_report gf_report;
typedef struct gf_buffer gf_buffer;

typedef struct gf_step_info {
  double reward;
  int terminated;
  int truncated;
  int blowup;
  int step;
  double phi;
  double v_x;
  double z_torso;
  double r_fwd;
  double r_h;
  double r_gait_bonus;
  double c_gait;
  double c_ctrl;
  double c_smooth;
  double c_contact;
  double c_ang;
  double c_zvel;
  double c_post;
  double total;
  int n_errors;
  uint8_t stance_target[GF_MAX_LEGS];
  uint8_t stance_actual[GF_MAX_LEGS];
} gf_step_info;

typedef struct gf_report_summary {
  size_t n_episodes;
  double mean_return;
  double std_return; /* population */
  double mean_displacement;
  double gait_compliance;
  double survival_rate;
  double tent_fraction;
} gf_report_summary;

typedef struct gf_episode_stats {
  uint64_t seed;
  double ret;
  int length;
  double displacement;
  double compliance;
  double tent_fraction;
  int survived;
} gf_episode_stats;

typedef struct gf_verify_result {
  int64_t transitions;
  int64_t episodes;
  int64_t mismatches;
  double max_reward_error;
  double max_obs_error;
} gf_verify_result;

GF_API const char* gf_version(void);
GF_API const char* gf_last_error(void);
GF_API const char* gf_status_name(gf_status status);

/* Morphologies are a built-in name (queen, bastion, tick, leaper), a config
 * file path, or <name>.json under $GAITFORGE_CONFIG_DIR. Overrides are
 * "dotted.key=value" strings and may be NULL when n_overrides is 0. */
GF_API gf_status gf_morphology_dims(const char* morph, int* obs_dim, int* act_dim, int* n_legs,
                                    int* n_body);

/* Canonical JSON of the resolved spec. When cap is too small, writes nothing,
 * sets *len_out to the needed size (excluding the NUL) and returns
 * GF_ERR_INVALID_INPUT. */
GF_API gf_status gf_morphology_export(const char* morph, const char* const* overrides,
                                      size_t n_overrides, char* buf, size_t cap,
                                      size_t* len_out);

GF_API gf_status gf_env_create(const char* morph, const char* const* overrides,
                               size_t n_overrides, gf_env** out);
GF_API void gf_env_destroy(gf_env* env);
GF_API int gf_env_obs_dim(const gf_env* env);
GF_API int gf_env_act_dim(const gf_env* env);
GF_API int gf_env_n_legs(const gf_env* env);
GF_API gf_status gf_env_reset(gf_env* env, uint64_t seed, double* obs, size_t obs_len);
/* obs and info may be NULL. */
GF_API gf_status gf_env_step(gf_env* env, const double* action, size_t act_len, double* obs,
                             size_t obs_len, gf_step_info* info);
GF_API gf_status gf_env_cpg_action(const gf_env* env, double* action, size_t act_len);
/* pos(3), quat w,x,y,z (4), linvel world (3), angvel body (3). */
GF_API gf_status gf_env_base_state(const gf_env* env, double out[13]);

/* policy: "cpg", "zero", "spawn:<command>" or "unix:<socket path>". seeds
 * may be NULL; then episodes use seeds 0..n_episodes-1. */
GF_API gf_status gf_evaluate(const char* morph, const char* const* overrides, size_t n_overrides,
                             const char* policy, int n_episodes, const uint64_t* seeds,
                             size_t n_seeds, gf_report** out);
GF_API gf_status gf_run_cpg(const char* morph, const char* const* overrides, size_t n_overrides,
                            int n_episodes, const uint64_t* seeds, size_t n_seeds,
                            gf_report** out);
GF_API void gf_report_destroy(gf_report* report);
GF_API gf_status gf_report_summary_get(const gf_report* report, gf_report_summary* out);
GF_API gf_status gf_report_episode(const gf_report* report, size_t index, gf_episode_stats* out);
GF_API gf_status gf_report_set_step(gf_report* report, int64_t step);
GF_API gf_status gf_report_write_csv(const gf_report* report, const char* path, int per_seed);

GF_API gf_status gf_record_buffer(const char* morph, const char* const* overrides,
                                  size_t n_overrides, int64_t n_transitions,
                                  const uint64_t* seeds, size_t n_seeds, const char* path);
/* Returns GF_ERR_VALIDATION when the replay disagrees; out is filled either
 * way and gf_last_error() lists the first problems. */
GF_API gf_status gf_verify_buffer(const char* path, double tol, gf_verify_result* out);

GF_API gf_status gf_buffer_read(const char* path, gf_buffer** out);
GF_API void gf_buffer_destroy(gf_buffer* buf);
/* GF_ERR_SCHEMA_MISMATCH unless buf was recorded with exactly this spec. */
GF_API gf_status gf_buffer_check_spec(const gf_buffer* buf, const char* morph,
                                      const char* const* overrides, size_t n_overrides);
GF_API int64_t gf_buffer_rows(const gf_buffer* buf);
GF_API gf_status gf_buffer_dims(const gf_buffer* buf, int* obs_dim, int* act_dim);
/* name: obs, action, reward, next_obs (f64), terminated, truncated (u8),
 * episode_id (i64). The pointer stays valid until gf_buffer_destroy. */
GF_API gf_status gf_buffer_column(const gf_buffer* buf, const char* name, const void** data,
                                  size_t* n_bytes);
/* Metadata JSON; pointer valid until gf_buffer_destroy. */
GF_API const char* gf_buffer_metadata(const gf_buffer* buf);

GF_API gf_status gf_dump_replay(const char* morph, const char* const* overrides,
                                size_t n_overrides, const char* policy, uint64_t seed,
                                int max_steps, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* GAITFORGE_H */
