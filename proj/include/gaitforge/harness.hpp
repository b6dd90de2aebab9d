#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitforge/buffer.hpp"
#include "gaitforge/model.hpp"
#include "gaitforge/policy.hpp"

namespace gaitforge {

struct EpisodeStats {
  std::uint64_t seed = 0;
  double ret = 0.0;
  int length = 0;
  double displacement = 0.0;  // base x at the end minus base x at reset
  double compliance = 0.0;    // fraction of steps with no gait errors
  double tent_fraction = 0.0; // fraction of steps with v_x inside the tent support
  bool survived = false;      // reached the horizon without terminating

  bool operator==(const EpisodeStats&) const = default;
};

// std_return is the population standard deviation (divide by n).
struct EvalReport {
  std::string morphology;
  std::string policy_name;
  std::int64_t step = 0;  // x-axis value for CSV rows
  std::vector<EpisodeStats> episodes;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_displacement = 0.0;
  double gait_compliance = 0.0;  // over all steps of all episodes
  double survival_rate = 0.0;
  double tent_fraction = 0.0;    // over all steps of all episodes

  bool operator==(const EvalReport&) const = default;
};

// Seeds default to 0..n-1. With an explicit list, n_episodes must be 0
// (take the list length) or equal to it.
std::vector<std::uint64_t> episode_seeds(int n_episodes, const std::vector<std::uint64_t>& seeds);

EpisodeStats run_episode(Env& env, Policy& policy, int episode, std::uint64_t seed);

// Throws kEmptyReport when no episodes are requested.
EvalReport evaluate(Policy& policy, const MorphologySpec& spec, int n_episodes,
                    const std::vector<std::uint64_t>& seeds = {});

EvalReport run_cpg(const MorphologySpec& spec, int n_episodes,
                   const std::vector<std::uint64_t>& seeds = {});

// Aggregates from per-episode stats; an empty list yields zeros.
void summarize(EvalReport& report);

// CPG transitions until n_transitions are collected. Episode k uses
// seeds[k], continuing with max(seeds) + 1, + 2, ... once the list runs out
// (0, 1, 2, ... when empty).
TransitionBuffer record_buffer(const MorphologySpec& spec, std::int64_t n_transitions,
                               const std::vector<std::uint64_t>& seeds = {});

struct VerifyReport {
  std::int64_t transitions = 0;
  std::int64_t episodes = 0;
  double max_reward_error = 0.0;
  double max_obs_error = 0.0;
  std::int64_t mismatches = 0;
  std::vector<std::string> problems;  // first few human-readable failures

  bool ok() const { return mismatches == 0; }
};

// Replays every episode from its seed and stored actions, checking rewards
// (within `tol`), observations, termination flags and the next_obs/obs
// chain. Throws kSchemaMismatch if the embedded spec does not hash to the
// recorded value.
VerifyReport verify_buffer(const TransitionBuffer& buf, double tol = 1e-9);

// Header "step,mean_return,std_return,morphology,policy_name", one aggregate
// row unless the report is empty, then optionally one row per episode with
// policy_name "<policy>:seed=<seed>". Numbers use %.17g.
std::string csv_text(const EvalReport& report, bool per_seed);
void emit_csv(const EvalReport& report, const std::string& path, bool per_seed);

// JSON lines: a header object, then one object per state with every body's
// world position and quaternion (w, x, y, z).
void dump_replay(const MorphologySpec& spec, Policy& policy, std::uint64_t seed, int max_steps,
                 const std::string& path);

}  // namespace gaitforge
