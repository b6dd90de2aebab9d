#include "gaitforge/env.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gaitforge/error.hpp"

namespace gaitforge {
namespace {

MorphologySpec validated(MorphologySpec spec) {
  require_valid(spec);
  return spec;
}

}  // namespace

std::vector<double> observe(const SimState& state, const ContactState& contact, double phi,
                            const MorphologySpec& spec) {
  std::vector<double> obs;
  obs.reserve(spec.obs_dim());
  obs.push_back(state.base_pos.z());
  const Eigen::Quaterniond& q = state.base_quat;
  obs.insert(obs.end(), {q.w(), q.x(), q.y(), q.z()});
  obs.insert(obs.end(), state.q_joints.begin(), state.q_joints.end());
  obs.insert(obs.end(), state.base_linvel.begin(), state.base_linvel.end());
  obs.insert(obs.end(), state.base_angvel.begin(), state.base_angvel.end());
  obs.insert(obs.end(), state.qd_joints.begin(), state.qd_joints.end());
  const WrenchMatrix w = clipped_wrenches(contact.wrenches, spec);
  obs.insert(obs.end(), w.data(), w.data() + w.size());
  obs.push_back(std::sin(phi));
  obs.push_back(std::cos(phi));
  if (static_cast<int>(obs.size()) != spec.obs_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "observation has " + std::to_string(obs.size()) +
                                                   " entries, expected " +
                                                   std::to_string(spec.obs_dim()));
  }
  return obs;
}

std::vector<double> reset_noise(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (double& x : out) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    x = 0.01 * (2.0 * u - 1.0);
  }
  return out;
}

Env::Env(MorphologySpec spec)
    : spec_(validated(std::move(spec))), dynamics_(spec_), cpg_(cpg_params(spec_)) {
  clock_.f_g = spec_.f_g;
}

std::vector<double> Env::reset(std::uint64_t seed) {
  const auto noise = reset_noise(seed, spec_.n_u());
  Eigen::VectorXd q(spec_.n_u());
  for (int i = 0; i < spec_.n_u(); ++i) q[i] = spec_.q_def[i] + noise[i];
  state_ = dynamics_.make_state(0.5 * (spec_.healthy_z.first + spec_.healthy_z.second), q);
  contact_ = dynamics_.contacts(state_);
  clock_ = {0.0, spec_.f_g};
  a_prev_.assign(spec_.n_u(), 0.0);
  step_ = 0;
  has_reset_ = true;
  done_ = false;
  obs_ = observe(state_, contact_, clock_.phi, spec_);
  return obs_;
}

StepResult Env::step(std::span<const double> action) {
  if (!has_reset_) throw Error(ErrorCode::kNotReset, "step called before reset");
  if (done_) throw Error(ErrorCode::kNotReset, "episode is over; call reset");
  if (static_cast<int>(action.size()) != spec_.n_u()) {
    throw Error(ErrorCode::kDimensionMismatch, "action has " + std::to_string(action.size()) +
                                                   " entries, expected " +
                                                   std::to_string(spec_.n_u()));
  }
  std::vector<double> clipped(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i])) {
      throw Error(ErrorCode::kInvalidInput, "action entry " + std::to_string(i) + " is not finite");
    }
    clipped[i] = std::clamp(action[i], -1.0, 1.0);
  }

  StepResult out;
  ++step_;
  out.info.step = step_;
  try {
    auto [next, contact] = dynamics_.control_step(state_, clipped, spec_);
    state_ = std::move(next);
    contact_ = std::move(contact);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumericalBlowup) throw;
    done_ = true;
    out.obs = obs_;
    out.terminated = true;
    out.info.blowup = true;
    out.info.breakdown.stance_target.assign(spec_.n_legs, false);
    out.info.breakdown.stance_actual.assign(spec_.n_legs, false);
    clock_ = advance_clock(clock_, spec_.control_dt());
    out.info.phi = clock_.phi;
    out.info.v_x = state_.base_linvel.x();
    out.info.z_torso = state_.base_pos.z();
    return out;
  }
  clock_ = advance_clock(clock_, spec_.control_dt());
  out.info.breakdown = total_reward(state_, contact_, clipped, a_prev_, clock_, spec_);
  out.reward = out.info.breakdown.total;
  a_prev_ = std::move(clipped);

  const double z = state_.base_pos.z();
  out.terminated = !(z >= spec_.healthy_z.first && z <= spec_.healthy_z.second);
  out.truncated = !out.terminated && step_ >= spec_.horizon;
  done_ = out.terminated || out.truncated;
  out.info.phi = clock_.phi;
  out.info.v_x = state_.base_linvel.x();
  out.info.z_torso = z;
  obs_ = observe(state_, contact_, clock_.phi, spec_);
  out.obs = obs_;
  return out;
}

std::vector<double> Env::cpg_action() const {
  if (!has_reset_) throw Error(ErrorCode::kNotReset, "cpg_action called before reset");
  return cpg_policy(state_, state_.time, clock_.phi, cpg_, spec_);
}

}  // namespace gaitforge
