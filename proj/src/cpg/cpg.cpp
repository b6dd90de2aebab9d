#include "gaitforge/cpg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gaitforge/error.hpp"
#include "gaitforge/reward.hpp"

namespace gaitforge {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double below_one(double s) { return std::clamp(s, 0.0, std::nextafter(1.0, 0.0)); }

}  // namespace

CpgParams cpg_params(const MorphologySpec& spec) {
  CpgParams p;
  p.f_g = spec.f_g;
  p.duty = spec.duty;
  p.offsets = spec.offsets;
  p.amp_hip = spec.cpg.amp_hip;
  p.amp_knee = spec.cpg.amp_knee;
  p.amp_ankle = spec.cpg.amp_ankle;
  p.amp_push = spec.cpg.amp_push;
  p.t_ramp = spec.cpg.t_ramp;
  for (int i = 0; i < spec.n_u(); ++i) {
    const PdGains& g = spec.cpg.gains[i % spec.joints_per_leg];
    p.kp.push_back(g.kp);
    p.kd.push_back(g.kd);
  }
  return p;
}

LegPhase leg_phase(double phi, double delta, double duty) {
  const double w = wrap_phase(phi + delta);
  const double split = kTwoPi * duty;
  if (w < split) return {LegMode::kStance, below_one(w / split)};
  return {LegMode::kSwing, below_one((w - split) / (kTwoPi - split))};
}

std::vector<double> joint_targets(int leg, const LegPhase& phase, const CpgParams& params,
                                  const MorphologySpec& spec) {
  if (leg < 0 || leg >= spec.n_legs) {
    throw Error(ErrorCode::kInvalidInput, "leg index " + std::to_string(leg) + " out of range");
  }
  const int base = leg * spec.joints_per_leg;
  const double s = phase.s;
  const double bell = std::sin(kPi * s);
  const bool stance = phase.mode == LegMode::kStance;
  std::vector<double> q(spec.joints_per_leg);
  q[0] = spec.q_def[base] + params.amp_hip * (stance ? 1.0 - 2.0 * s : 2.0 * s - 1.0);
  q[1] = spec.q_def[base + 1] + (stance ? params.amp_push : params.amp_knee) * bell;
  if (spec.joints_per_leg > 2) {
    q[2] = spec.q_def[base + 2] + (stance ? 0.5 * params.amp_push : params.amp_ankle) * bell;
  }
  return q;
}

std::vector<double> pd_action(std::span<const double> q_targets, const SimState& state, double t,
                              const CpgParams& params, const MorphologySpec& spec) {
  const int n = spec.n_u();
  if (static_cast<int>(q_targets.size()) != n || state.q_joints.size() != n ||
      state.qd_joints.size() != n || static_cast<int>(params.kp.size()) != n ||
      static_cast<int>(params.kd.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "PD inputs do not match n_u");
  }
  const double ramp = params.t_ramp > 0.0 ? std::min(1.0, std::max(0.0, t) / params.t_ramp) : 1.0;
  std::vector<double> action(n);
  for (int i = 0; i < n; ++i) {
    const double tau =
        params.kp[i] * (q_targets[i] - state.q_joints[i]) - params.kd[i] * state.qd_joints[i];
    action[i] = std::clamp(ramp * tau / spec.gear[i], -1.0, 1.0);
  }
  return action;
}

std::vector<double> cpg_policy(const SimState& state, double t, double phi,
                               const CpgParams& params, const MorphologySpec& spec) {
  if (static_cast<int>(params.offsets.size()) != spec.n_legs) {
    throw Error(ErrorCode::kDimensionMismatch, "CPG offsets do not match n_legs");
  }
  std::vector<double> targets;
  targets.reserve(spec.n_u());
  for (int leg = 0; leg < spec.n_legs; ++leg) {
    const auto q = joint_targets(leg, leg_phase(phi, params.offsets[leg], params.duty), params,
                                 spec);
    targets.insert(targets.end(), q.begin(), q.end());
  }
  return pd_action(targets, state, t, params, spec);
}

}  // namespace gaitforge
