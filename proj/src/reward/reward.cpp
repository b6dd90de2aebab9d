#include "gaitforge/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gaitforge/error.hpp"

namespace gaitforge {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_size(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " has " + std::to_string(got) +
                                                   " entries, expected " + std::to_string(want));
  }
}

}  // namespace

double wrap_phase(double angle) {
  double w = std::fmod(angle, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

GaitClock advance_clock(const GaitClock& clock, double dt) {
  if (dt < 0.0 || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidInput, "clock advance needs a finite dt >= 0");
  }
  if (dt == 0.0) return clock;
  return {wrap_phase(clock.phi + kTwoPi * clock.f_g * dt), clock.f_g};
}

double forward_reward(double v_x, const MorphologySpec& spec) {
  return spec.weights.w_fwd * std::max(0.0, 1.0 - std::abs(v_x - spec.v_star) / spec.sigma_v);
}

double healthy_bonus(double z_torso, const MorphologySpec& spec) {
  const bool ok = z_torso >= spec.healthy_z.first && z_torso <= spec.healthy_z.second;
  return ok ? spec.weights.w_h : 0.0;
}

bool target_stance(double phi, double delta, double duty) {
  return wrap_phase(phi + delta) < kTwoPi * duty;
}

bool actual_stance(double z_foot, double z_thr) { return z_foot < z_thr; }

GaitTerms gait_terms(const std::vector<bool>& actual, const std::vector<bool>& target,
                     const MorphologySpec& spec) {
  require_size(actual.size(), spec.n_legs, "stance_actual");
  require_size(target.size(), spec.n_legs, "stance_target");
  GaitTerms g;
  for (int i = 0; i < spec.n_legs; ++i) g.n_errors += actual[i] != target[i] ? 1 : 0;
  g.bonus = spec.weights.w_gb * (1.0 - static_cast<double>(g.n_errors) / spec.n_legs);
  g.cost = spec.weights.w_gc * g.n_errors;
  return g;
}

ActionCosts action_costs(std::span<const double> action, std::span<const double> a_prev,
                         const MorphologySpec& spec) {
  require_size(action.size(), spec.n_u(), "action");
  require_size(a_prev.size(), spec.n_u(), "a_prev");
  double sq = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    sq += action[i] * action[i];
    const double d = action[i] - a_prev[i];
    diff += d * d;
  }
  return {spec.w_ctrl() * sq, spec.weights.w_s * diff};
}

WrenchMatrix clipped_wrenches(const WrenchMatrix& wrenches, const MorphologySpec& spec) {
  return (wrenches * spec.contact_scale).cwiseMax(-1.0).cwiseMin(1.0);
}

SafetyCosts safety_costs(const WrenchMatrix& wrenches, const Eigen::Vector3d& angvel, double v_z,
                         const MorphologySpec& spec) {
  require_size(wrenches.rows(), spec.n_body(), "wrench rows");
  const RewardWeights& w = spec.weights;
  SafetyCosts c;
  c.contact = w.w_cc * clipped_wrenches(wrenches, spec).squaredNorm();
  c.ang = w.w_a * (angvel.x() * angvel.x() + angvel.y() * angvel.y());
  c.zvel = w.w_z * v_z * v_z;
  return c;
}

double posture_cost(const Eigen::VectorXd& q, const MorphologySpec& spec) {
  require_size(q.size(), spec.n_u(), "q_joints");
  double sum = 0.0;
  for (int i = 0; i < spec.n_u(); ++i) {
    const double d = q[i] - spec.q_def[i];
    sum += d * d;
  }
  return spec.weights.w_p * sum;
}

RewardBreakdown total_reward(const SimState& state, const ContactState& contact,
                             std::span<const double> action, std::span<const double> a_prev,
                             const GaitClock& clock, const MorphologySpec& spec) {
  require_size(contact.foot_heights.size(), spec.n_legs, "foot_heights");
  RewardBreakdown r;
  r.stance_target.resize(spec.n_legs);
  r.stance_actual.resize(spec.n_legs);
  for (int i = 0; i < spec.n_legs; ++i) {
    r.stance_target[i] = target_stance(clock.phi, spec.offsets[i], spec.duty);
    r.stance_actual[i] = actual_stance(contact.foot_heights[i], spec.z_thr);
  }
  r.r_fwd = forward_reward(state.base_linvel.x(), spec);
  r.r_h = healthy_bonus(state.base_pos.z(), spec);
  const GaitTerms g = gait_terms(r.stance_actual, r.stance_target, spec);
  r.r_gait_bonus = g.bonus;
  r.c_gait = g.cost;
  r.n_errors = g.n_errors;
  const ActionCosts a = action_costs(action, a_prev, spec);
  r.c_ctrl = a.ctrl;
  r.c_smooth = a.smooth;
  const SafetyCosts s = safety_costs(contact.wrenches, state.base_angvel, state.base_linvel.z(), spec);
  r.c_contact = s.contact;
  r.c_ang = s.ang;
  r.c_zvel = s.zvel;
  r.c_post = posture_cost(state.q_joints, spec);
  r.total = r.signed_sum();
  return r;
}

}  // namespace gaitforge
