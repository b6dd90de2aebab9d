#include "gaitforge/gaitforge.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "gaitforge/buffer.hpp"
#include "gaitforge/config.hpp"
#include "gaitforge/env.hpp"
#include "gaitforge/error.hpp"
#include "gaitforge/harness.hpp"

struct gf_env {
  gaitforge::Env env;
};

struct gf_report {
  gaitforge::EvalReport report;
};

struct gf_buffer {
  gaitforge::TransitionBuffer buf;
  std::string meta;
};

namespace {

using gaitforge::Error;
using gaitforge::ErrorCode;

thread_local std::string g_last_error;

struct NullArgument {
  const char* what;
};

template <typename F>
gf_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<gf_status>(static_cast<int>(e.code()));
  } catch (const NullArgument& e) {
    g_last_error = std::string("null argument: ") + e.what;
    return GF_ERR_NULL_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown internal error";
    return GF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw NullArgument{what};
}

std::vector<std::string> overrides_of(const char* const* ov, std::size_t n) {
  if (n > 0) need(ov, "overrides");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    need(ov[i], "override entry");
    out.emplace_back(ov[i]);
  }
  return out;
}

gaitforge::MorphologySpec load(const char* morph, const char* const* ov, std::size_t n) {
  need(morph, "morph");
  return gaitforge::load_morphology(morph, overrides_of(ov, n));
}

std::vector<std::uint64_t> seeds_of(const std::uint64_t* seeds, std::size_t n) {
  if (n > 0) need(seeds, "seeds");
  return n > 0 ? std::vector<std::uint64_t>(seeds, seeds + n) : std::vector<std::uint64_t>{};
}

void check_len(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " buffer has length " +
                                                   std::to_string(got) + ", expected " +
                                                   std::to_string(want));
  }
}

void fill_info(const gaitforge::StepResult& r, gf_step_info* info) {
  const gaitforge::RewardBreakdown& b = r.info.breakdown;
  *info = gf_step_info{};
  info->reward = r.reward;
  info->terminated = r.terminated ? 1 : 0;
  info->truncated = r.truncated ? 1 : 0;
  info->blowup = r.info.blowup ? 1 : 0;
  info->step = r.info.step;
  info->phi = r.info.phi;
  info->v_x = r.info.v_x;
  info->z_torso = r.info.z_torso;
  info->r_fwd = b.r_fwd;
  info->r_h = b.r_h;
  info->r_gait_bonus = b.r_gait_bonus;
  info->c_gait = b.c_gait;
  info->c_ctrl = b.c_ctrl;
  info->c_smooth = b.c_smooth;
  info->c_contact = b.c_contact;
  info->c_ang = b.c_ang;
  info->c_zvel = b.c_zvel;
  info->c_post = b.c_post;
  info->total = b.total;
  info->n_errors = b.n_errors;
  for (std::size_t i = 0; i < b.stance_target.size() && i < GF_MAX_LEGS; ++i) {
    info->stance_target[i] = b.stance_target[i] ? 1 : 0;
    info->stance_actual[i] = b.stance_actual[i] ? 1 : 0;
  }
}

}  // namespace

extern "C" {

const char* gf_version(void) { return "1.0.0"; }

const char* gf_last_error(void) { return g_last_error.c_str(); }

const char* gf_status_name(gf_status status) {
  switch (status) {
    case GF_OK: return "OK";
    case GF_ERR_NULL_ARGUMENT: return "NullArgument";
    case GF_ERR_INTERNAL: return "InternalError";
    default: break;
  }
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= 10) return gaitforge::error_code_name(static_cast<ErrorCode>(code));
  return "Unknown";
}

gf_status gf_morphology_dims(const char* morph, int* obs_dim, int* act_dim, int* n_legs,
                             int* n_body) {
  return guard([&] {
    const auto spec = load(morph, nullptr, 0);
    if (obs_dim != nullptr) *obs_dim = spec.obs_dim();
    if (act_dim != nullptr) *act_dim = spec.n_u();
    if (n_legs != nullptr) *n_legs = spec.n_legs;
    if (n_body != nullptr) *n_body = spec.n_body();
  });
}

gf_status gf_morphology_export(const char* morph, const char* const* overrides,
                               size_t n_overrides, char* buf, size_t cap, size_t* len_out) {
  return guard([&] {
    need(len_out, "len_out");
    const std::string text = gaitforge::serialize_spec(load(morph, overrides, n_overrides));
    *len_out = text.size();
    if (buf == nullptr || cap < text.size() + 1) {
      throw Error(ErrorCode::kInvalidInput,
                  "export needs " + std::to_string(text.size() + 1) + " bytes");
    }
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

gf_status gf_env_create(const char* morph, const char* const* overrides, size_t n_overrides,
                        gf_env** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    *out = new gf_env{gaitforge::Env(load(morph, overrides, n_overrides))};
  });
}

void gf_env_destroy(gf_env* env) { delete env; }

int gf_env_obs_dim(const gf_env* env) { return env != nullptr ? env->env.obs_dim() : -1; }
int gf_env_act_dim(const gf_env* env) { return env != nullptr ? env->env.act_dim() : -1; }
int gf_env_n_legs(const gf_env* env) { return env != nullptr ? env->env.spec().n_legs : -1; }

gf_status gf_env_reset(gf_env* env, uint64_t seed, double* obs, size_t obs_len) {
  return guard([&] {
    need(env, "env");
    need(obs, "obs");
    check_len(obs_len, env->env.obs_dim(), "obs");
    const auto o = env->env.reset(seed);
    std::copy(o.begin(), o.end(), obs);
  });
}

gf_status gf_env_step(gf_env* env, const double* action, size_t act_len, double* obs,
                      size_t obs_len, gf_step_info* info) {
  return guard([&] {
    need(env, "env");
    need(action, "action");
    if (obs != nullptr) check_len(obs_len, env->env.obs_dim(), "obs");
    const auto r = env->env.step(std::span<const double>(action, act_len));
    if (obs != nullptr) std::copy(r.obs.begin(), r.obs.end(), obs);
    if (info != nullptr) fill_info(r, info);
  });
}

gf_status gf_env_cpg_action(const gf_env* env, double* action, size_t act_len) {
  return guard([&] {
    need(env, "env");
    need(action, "action");
    check_len(act_len, env->env.act_dim(), "action");
    const auto a = env->env.cpg_action();
    std::copy(a.begin(), a.end(), action);
  });
}

gf_status gf_env_base_state(const gf_env* env, double out[13]) {
  return guard([&] {
    need(env, "env");
    need(out, "out");
    const gaitforge::SimState& s = env->env.state();
    const double v[13] = {s.base_pos.x(),    s.base_pos.y(),    s.base_pos.z(),
                          s.base_quat.w(),   s.base_quat.x(),   s.base_quat.y(),
                          s.base_quat.z(),   s.base_linvel.x(), s.base_linvel.y(),
                          s.base_linvel.z(), s.base_angvel.x(), s.base_angvel.y(),
                          s.base_angvel.z()};
    std::copy(v, v + 13, out);
  });
}

gf_status gf_evaluate(const char* morph, const char* const* overrides, size_t n_overrides,
                      const char* policy, int n_episodes, const uint64_t* seeds, size_t n_seeds,
                      gf_report** out) {
  return guard([&] {
    need(out, "out");
    need(policy, "policy");
    *out = nullptr;
    const auto spec = load(morph, overrides, n_overrides);
    auto p = gaitforge::make_policy(policy);
    auto rep = std::make_unique<gf_report>();
    rep->report = gaitforge::evaluate(*p, spec, n_episodes, seeds_of(seeds, n_seeds));
    *out = rep.release();
  });
}

gf_status gf_run_cpg(const char* morph, const char* const* overrides, size_t n_overrides,
                     int n_episodes, const uint64_t* seeds, size_t n_seeds, gf_report** out) {
  return gf_evaluate(morph, overrides, n_overrides, "cpg", n_episodes, seeds, n_seeds, out);
}

void gf_report_destroy(gf_report* report) { delete report; }

gf_status gf_report_summary_get(const gf_report* report, gf_report_summary* out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    const gaitforge::EvalReport& r = report->report;
    *out = gf_report_summary{r.episodes.size(), r.mean_return,     r.std_return,
                             r.mean_displacement, r.gait_compliance, r.survival_rate,
                             r.tent_fraction};
  });
}

gf_status gf_report_episode(const gf_report* report, size_t index, gf_episode_stats* out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    const auto& eps = report->report.episodes;
    if (index >= eps.size()) {
      throw Error(ErrorCode::kInvalidInput, "episode index " + std::to_string(index) +
                                                " out of range");
    }
    const gaitforge::EpisodeStats& e = eps[index];
    *out = gf_episode_stats{e.seed,       e.ret,           e.length,          e.displacement,
                            e.compliance, e.tent_fraction, e.survived ? 1 : 0};
  });
}

gf_status gf_report_set_step(gf_report* report, int64_t step) {
  return guard([&] {
    need(report, "report");
    report->report.step = step;
  });
}

gf_status gf_report_write_csv(const gf_report* report, const char* path, int per_seed) {
  return guard([&] {
    need(report, "report");
    need(path, "path");
    gaitforge::emit_csv(report->report, path, per_seed != 0);
  });
}

gf_status gf_record_buffer(const char* morph, const char* const* overrides, size_t n_overrides,
                           int64_t n_transitions, const uint64_t* seeds, size_t n_seeds,
                           const char* path) {
  return guard([&] {
    need(path, "path");
    const auto spec = load(morph, overrides, n_overrides);
    const auto buf = gaitforge::record_buffer(spec, n_transitions, seeds_of(seeds, n_seeds));
    gaitforge::write_buffer(buf, path);
  });
}

gf_status gf_verify_buffer(const char* path, double tol, gf_verify_result* out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    const auto rep = gaitforge::verify_buffer(gaitforge::read_buffer(path), tol);
    *out = gf_verify_result{rep.transitions, rep.episodes, rep.mismatches, rep.max_reward_error,
                            rep.max_obs_error};
    if (!rep.ok()) {
      std::string msg = std::to_string(rep.mismatches) + " replay mismatches:";
      for (const auto& p : rep.problems) msg += "\n  " + p;
      throw Error(ErrorCode::kValidation, msg);
    }
  });
}

gf_status gf_buffer_read(const char* path, gf_buffer** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto b = std::make_unique<gf_buffer>();
    b->buf = gaitforge::read_buffer(path);
    b->meta = gaitforge::sidecar_json(b->buf);
    *out = b.release();
  });
}

gf_status gf_buffer_check_spec(const gf_buffer* buf, const char* morph,
                               const char* const* overrides, size_t n_overrides) {
  return guard([&] {
    need(buf, "buf");
    const auto spec = load(morph, overrides, n_overrides);
    if (buf->buf.meta.spec_hash != gaitforge::spec_hash(spec)) {
      throw gaitforge::Error(gaitforge::ErrorCode::kSchemaMismatch,
                             "buffer was recorded for morphology '" + buf->buf.meta.morphology +
                                 "' with a different spec");
    }
  });
}

void gf_buffer_destroy(gf_buffer* buf) { delete buf; }

int64_t gf_buffer_rows(const gf_buffer* buf) {
  return buf != nullptr ? static_cast<int64_t>(buf->buf.size()) : -1;
}

gf_status gf_buffer_dims(const gf_buffer* buf, int* obs_dim, int* act_dim) {
  return guard([&] {
    need(buf, "buf");
    if (obs_dim != nullptr) *obs_dim = buf->buf.meta.obs_dim;
    if (act_dim != nullptr) *act_dim = buf->buf.meta.act_dim;
  });
}

gf_status gf_buffer_column(const gf_buffer* buf, const char* name, const void** data,
                           size_t* n_bytes) {
  return guard([&] {
    need(buf, "buf");
    need(name, "name");
    need(data, "data");
    need(n_bytes, "n_bytes");
    const gaitforge::TransitionBuffer& b = buf->buf;
    const std::string n = name;
    const auto set = [&](const auto& vec) {
      *data = vec.data();
      *n_bytes = vec.size() * sizeof(vec[0]);
    };
    if (n == "obs") set(b.obs);
    else if (n == "action") set(b.action);
    else if (n == "reward") set(b.reward);
    else if (n == "next_obs") set(b.next_obs);
    else if (n == "terminated") set(b.terminated);
    else if (n == "truncated") set(b.truncated);
    else if (n == "episode_id") set(b.episode_id);
    else throw Error(ErrorCode::kInvalidInput, "no buffer column named '" + n + "'");
  });
}

const char* gf_buffer_metadata(const gf_buffer* buf) {
  return buf != nullptr ? buf->meta.c_str() : nullptr;
}

gf_status gf_dump_replay(const char* morph, const char* const* overrides, size_t n_overrides,
                         const char* policy, uint64_t seed, int max_steps, const char* path) {
  return guard([&] {
    need(policy, "policy");
    need(path, "path");
    const auto spec = load(morph, overrides, n_overrides);
    auto p = gaitforge::make_policy(policy);
    gaitforge::dump_replay(spec, *p, seed, max_steps, path);
  });
}

}  // extern "C"
