#include "gaitforge/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>

#include "gaitforge/config.hpp"
#include "gaitforge/error.hpp"

namespace gaitforge {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (!(d <= m)) m = d;  // NaN propagates as a mismatch
  }
  return m;
}

}  // namespace

std::vector<std::uint64_t> episode_seeds(int n_episodes, const std::vector<std::uint64_t>& seeds) {
  if (n_episodes < 0) throw Error(ErrorCode::kInvalidInput, "episode count must be >= 0");
  if (seeds.empty()) {
    std::vector<std::uint64_t> out(n_episodes);
    for (int i = 0; i < n_episodes; ++i) out[i] = static_cast<std::uint64_t>(i);
    return out;
  }
  if (n_episodes != 0 && n_episodes != static_cast<int>(seeds.size())) {
    throw Error(ErrorCode::kInvalidInput, std::to_string(seeds.size()) + " seeds given for " +
                                              std::to_string(n_episodes) + " episodes");
  }
  return seeds;
}

EpisodeStats run_episode(Env& env, Policy& policy, int episode, std::uint64_t seed) {
  EpisodeStats st;
  st.seed = seed;
  std::vector<double> obs = env.reset(seed);
  policy.begin_episode(episode, seed);
  const double x0 = env.state().base_pos.x();
  const MorphologySpec& spec = env.spec();
  int compliant = 0;
  int in_tent = 0;
  bool terminated = false;
  while (!env.done()) {
    const StepResult r = env.step(policy.act(env, obs));
    st.ret += r.reward;
    ++st.length;
    if (!r.info.blowup && r.info.breakdown.n_errors == 0) ++compliant;
    if (r.info.v_x >= spec.v_star - spec.sigma_v && r.info.v_x <= spec.v_star + spec.sigma_v) {
      ++in_tent;
    }
    terminated = r.terminated;
    obs = r.obs;
  }
  st.displacement = env.state().base_pos.x() - x0;
  st.compliance = static_cast<double>(compliant) / st.length;
  st.tent_fraction = static_cast<double>(in_tent) / st.length;
  st.survived = !terminated;
  return st;
}

void summarize(EvalReport& rep) {
  const auto n = static_cast<double>(rep.episodes.size());
  rep.mean_return = rep.std_return = rep.mean_displacement = 0.0;
  rep.gait_compliance = rep.survival_rate = rep.tent_fraction = 0.0;
  if (rep.episodes.empty()) return;
  double steps = 0.0;
  for (const EpisodeStats& e : rep.episodes) {
    rep.mean_return += e.ret;
    rep.mean_displacement += e.displacement;
    rep.survival_rate += e.survived ? 1.0 : 0.0;
    rep.gait_compliance += e.compliance * e.length;
    rep.tent_fraction += e.tent_fraction * e.length;
    steps += e.length;
  }
  rep.mean_return /= n;
  rep.mean_displacement /= n;
  rep.survival_rate /= n;
  if (steps > 0.0) {
    rep.gait_compliance /= steps;
    rep.tent_fraction /= steps;
  }
  double var = 0.0;
  for (const EpisodeStats& e : rep.episodes) var += (e.ret - rep.mean_return) * (e.ret - rep.mean_return);
  rep.std_return = std::sqrt(var / n);
}

EvalReport evaluate(Policy& policy, const MorphologySpec& spec, int n_episodes,
                    const std::vector<std::uint64_t>& seeds) {
  const auto list = episode_seeds(n_episodes, seeds);
  if (list.empty()) throw Error(ErrorCode::kEmptyReport, "evaluation needs at least one episode");
  EvalReport rep;
  rep.morphology = spec.name;
  rep.policy_name = policy.name();
  Env env(spec);
  for (std::size_t i = 0; i < list.size(); ++i) {
    rep.episodes.push_back(run_episode(env, policy, static_cast<int>(i), list[i]));
  }
  policy.finish();
  summarize(rep);
  return rep;
}

EvalReport run_cpg(const MorphologySpec& spec, int n_episodes,
                   const std::vector<std::uint64_t>& seeds) {
  CpgPolicy policy;
  return evaluate(policy, spec, n_episodes, seeds);
}

TransitionBuffer record_buffer(const MorphologySpec& spec, std::int64_t n_transitions,
                               const std::vector<std::uint64_t>& seeds) {
  if (n_transitions <= 0) throw Error(ErrorCode::kInvalidInput, "transition count must be > 0");
  TransitionBuffer buf;
  BufferMetadata& m = buf.meta;
  m.morphology = spec.name;
  m.spec_json = serialize_spec(spec, -1);
  m.spec_hash = spec_hash(spec);
  m.control_dt = spec.control_dt();
  m.created = utc_now();
  m.obs_dim = spec.obs_dim();
  m.act_dim = spec.n_u();

  const auto n = static_cast<std::size_t>(n_transitions);
  buf.obs.reserve(n * m.obs_dim);
  buf.next_obs.reserve(n * m.obs_dim);
  buf.action.reserve(n * m.act_dim);

  Env env(spec);
  CpgPolicy policy;
  std::uint64_t next_seed = seeds.empty() ? 0 : *std::max_element(seeds.begin(), seeds.end()) + 1;
  std::int64_t episode = 0;
  while (buf.size() < n) {
    const std::uint64_t seed =
        episode < static_cast<std::int64_t>(seeds.size()) ? seeds[episode] : next_seed++;
    m.seeds.push_back(seed);
    std::vector<double> obs = env.reset(seed);
    while (!env.done() && buf.size() < n) {
      const std::vector<double> action = policy.act(env, obs);
      const StepResult r = env.step(action);
      buf.obs.insert(buf.obs.end(), obs.begin(), obs.end());
      buf.action.insert(buf.action.end(), action.begin(), action.end());
      buf.reward.push_back(r.reward);
      buf.next_obs.insert(buf.next_obs.end(), r.obs.begin(), r.obs.end());
      buf.terminated.push_back(r.terminated ? 1 : 0);
      buf.truncated.push_back(r.truncated ? 1 : 0);
      buf.episode_id.push_back(episode);
      obs = r.obs;
    }
    m.final_episode_cut = !env.done();
    ++episode;
  }
  return buf;
}

VerifyReport verify_buffer(const TransitionBuffer& buf, double tol) {
  check_consistent(buf);
  const MorphologySpec spec = parse_spec(buf.meta.spec_json);
  if (spec_hash(spec) != buf.meta.spec_hash) {
    throw Error(ErrorCode::kSchemaMismatch, "embedded spec does not match the recorded spec hash");
  }
  if (spec.obs_dim() != buf.meta.obs_dim || spec.n_u() != buf.meta.act_dim) {
    throw Error(ErrorCode::kSchemaMismatch, "buffer dims do not match the embedded spec");
  }
  VerifyReport rep;
  const auto fail = [&rep](const std::string& what) {
    ++rep.mismatches;
    if (rep.problems.size() < 20) rep.problems.push_back(what);
  };
  const std::size_t od = spec.obs_dim();
  const std::size_t ad = spec.n_u();
  const std::size_t n = buf.size();
  Env env(spec);
  std::size_t i = 0;
  while (i < n) {
    const std::int64_t ep = buf.episode_id[i];
    ++rep.episodes;
    if (ep < 0 || ep >= static_cast<std::int64_t>(buf.meta.seeds.size())) {
      fail("row " + std::to_string(i) + ": episode id " + std::to_string(ep) + " has no seed");
      while (i < n && buf.episode_id[i] == ep) ++i;
      continue;
    }
    env.reset(buf.meta.seeds[ep]);
    for (; i < n && buf.episode_id[i] == ep; ++i) {
      const std::string row = "row " + std::to_string(i) + ": ";
      if (env.done()) {
        fail(row + "episode continues after it ended");
        break;
      }
      const double obs_err = max_abs_diff(&buf.obs[i * od], env.last_obs().data(), od);
      rep.max_obs_error = std::max(rep.max_obs_error, obs_err);
      if (!(obs_err <= tol)) fail(row + "obs differs from replay by " + num(obs_err));

      const StepResult r = env.step(std::span<const double>(&buf.action[i * ad], ad));
      ++rep.transitions;
      const double rew_err = std::abs(r.reward - buf.reward[i]);
      rep.max_reward_error = std::max(rep.max_reward_error, rew_err);
      if (!(rew_err <= tol)) fail(row + "reward differs from replay by " + num(rew_err));
      const double next_err = max_abs_diff(&buf.next_obs[i * od], r.obs.data(), od);
      rep.max_obs_error = std::max(rep.max_obs_error, next_err);
      if (!(next_err <= tol)) fail(row + "next_obs differs from replay by " + num(next_err));
      if ((buf.terminated[i] != 0) != r.terminated || (buf.truncated[i] != 0) != r.truncated) {
        fail(row + "termination flags differ from replay");
      }
      if (i + 1 < n && buf.episode_id[i + 1] == ep &&
          !std::equal(&buf.next_obs[i * od], &buf.next_obs[i * od] + od, &buf.obs[(i + 1) * od])) {
        fail(row + "next_obs does not chain into the following obs");
      }
    }
    const bool last = i >= n;
    if (!env.done() && !(last && buf.meta.final_episode_cut)) {
      fail("episode " + std::to_string(ep) + " ends without a terminal flag");
    }
  }
  return rep;
}

std::string csv_text(const EvalReport& rep, bool per_seed) {
  std::string out = "step,mean_return,std_return,morphology,policy_name\n";
  if (rep.episodes.empty()) return out;
  const std::string step = std::to_string(rep.step);
  out += step + "," + num(rep.mean_return) + "," + num(rep.std_return) + "," + rep.morphology +
         "," + rep.policy_name + "\n";
  if (per_seed) {
    for (const EpisodeStats& e : rep.episodes) {
      out += step + "," + num(e.ret) + "," + num(0.0) + "," + rep.morphology + "," +
             rep.policy_name + ":seed=" + std::to_string(e.seed) + "\n";
    }
  }
  return out;
}

void emit_csv(const EvalReport& rep, const std::string& path, bool per_seed) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  f << csv_text(rep, per_seed);
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void dump_replay(const MorphologySpec& spec, Policy& policy, std::uint64_t seed, int max_steps,
                 const std::string& path) {
  using nlohmann::json;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  Env env(spec);
  std::vector<double> obs = env.reset(seed);
  policy.begin_episode(0, seed);
  json names = json::array();
  for (const BodyDef& b : spec.bodies) names.push_back(b.name);
  f << json{{"morphology", spec.name},
            {"seed", seed},
            {"policy", policy.name()},
            {"control_dt", spec.control_dt()},
            {"bodies", names}}
           .dump()
    << "\n";
  const int limit = max_steps > 0 ? max_steps : spec.horizon;
  const auto frame = [&](double reward) {
    json pos = json::array();
    json quat = json::array();
    for (const BodyPose& p : env.dynamics().body_poses(env.state())) {
      pos.push_back({p.pos.x(), p.pos.y(), p.pos.z()});
      quat.push_back({p.quat.w(), p.quat.x(), p.quat.y(), p.quat.z()});
    }
    f << json{{"step", env.step_index()},
              {"time", env.state().time},
              {"phi", env.phi()},
              {"reward", reward},
              {"pos", pos},
              {"quat", quat}}
             .dump()
      << "\n";
  };
  frame(0.0);
  while (!env.done() && env.step_index() < limit) {
    const StepResult r = env.step(policy.act(env, obs));
    obs = r.obs;
    frame(r.reward);
  }
  policy.finish();
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace gaitforge
