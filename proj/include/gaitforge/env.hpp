#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gaitforge/cpg.hpp"
#include "gaitforge/dynamics.hpp"
#include "gaitforge/model.hpp"
#include "gaitforge/reward.hpp"

namespace gaitforge {

struct StepInfo {
  RewardBreakdown breakdown;
  double phi = 0.0;
  double v_x = 0.0;
  double z_torso = 0.0;
  int step = 0;  // number of completed steps in the episode
  bool blowup = false;
};

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

// Observation layout: [z, quat(w,x,y,z), q] [linvel, angvel, qd]
// [clipped wrenches, torso first] [sin phi, cos phi].
std::vector<double> observe(const SimState& state, const ContactState& contact, double phi,
                            const MorphologySpec& spec);

// Joint noise for reset, uniform in [-0.01, 0.01], from a seeded mt19937_64.
std::vector<double> reset_noise(std::uint64_t seed, int n);

class Env {
 public:
  explicit Env(MorphologySpec spec);

  const MorphologySpec& spec() const { return spec_; }
  const Dynamics& dynamics() const { return dynamics_; }
  int obs_dim() const { return spec_.obs_dim(); }
  int act_dim() const { return spec_.n_u(); }

  std::vector<double> reset(std::uint64_t seed);

  // Throws kNotReset before the first reset or after the episode ended,
  // kDimensionMismatch / kInvalidInput for bad actions.
  StepResult step(std::span<const double> action);

  // CPG action for the current state and phase.
  std::vector<double> cpg_action() const;

  const SimState& state() const { return state_; }
  const ContactState& contact() const { return contact_; }
  double phi() const { return clock_.phi; }
  int step_index() const { return step_; }
  bool done() const { return done_; }
  bool has_reset() const { return has_reset_; }
  const std::vector<double>& last_obs() const { return obs_; }

 private:
  MorphologySpec spec_;
  Dynamics dynamics_;
  CpgParams cpg_;
  SimState state_;
  ContactState contact_;
  GaitClock clock_;
  std::vector<double> a_prev_;
  std::vector<double> obs_;
  int step_ = 0;
  bool has_reset_ = false;
  bool done_ = false;
};

}  // namespace gaitforge
