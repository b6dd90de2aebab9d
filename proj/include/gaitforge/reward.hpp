#pragma once

#include <span>
#include <vector>

#include "gaitforge/dynamics.hpp"
#include "gaitforge/model.hpp"

namespace gaitforge {

struct GaitClock {
  double phi = 0.0;  // [0, 2pi)
  double f_g = 1.25;
};

// phi' = (phi + 2*pi*f_g*dt) mod 2pi. dt = 0 is the identity; dt < 0 throws
// kInvalidInput.
GaitClock advance_clock(const GaitClock& clock, double dt);

// Maps any finite angle into [0, 2pi).
double wrap_phase(double angle);

double forward_reward(double v_x, const MorphologySpec& spec);
double healthy_bonus(double z_torso, const MorphologySpec& spec);
bool target_stance(double phi, double delta, double duty);
bool actual_stance(double z_foot, double z_thr);

struct GaitTerms {
  double bonus = 0.0;
  double cost = 0.0;
  int n_errors = 0;
};

GaitTerms gait_terms(const std::vector<bool>& actual, const std::vector<bool>& target,
                     const MorphologySpec& spec);

struct ActionCosts {
  double ctrl = 0.0;
  double smooth = 0.0;
};

ActionCosts action_costs(std::span<const double> action, std::span<const double> a_prev,
                         const MorphologySpec& spec);

struct SafetyCosts {
  double contact = 0.0;
  double ang = 0.0;
  double zvel = 0.0;
};

// angvel is body frame; yaw (z) is ignored.
SafetyCosts safety_costs(const WrenchMatrix& wrenches, const Eigen::Vector3d& angvel, double v_z,
                         const MorphologySpec& spec);

double posture_cost(const Eigen::VectorXd& q, const MorphologySpec& spec);

// Raw wrench scaled by contact_scale and clipped to [-1, 1]; shared by the
// contact cost and the observation.
WrenchMatrix clipped_wrenches(const WrenchMatrix& wrenches, const MorphologySpec& spec);

struct RewardBreakdown {
  double r_fwd = 0.0;
  double r_h = 0.0;
  double r_gait_bonus = 0.0;
  double c_gait = 0.0;
  double c_ctrl = 0.0;
  double c_smooth = 0.0;
  double c_contact = 0.0;
  double c_ang = 0.0;
  double c_zvel = 0.0;
  double c_post = 0.0;
  double total = 0.0;
  std::vector<bool> stance_target;
  std::vector<bool> stance_actual;
  int n_errors = 0;

  double signed_sum() const {
    return r_fwd + r_h + r_gait_bonus -
           (c_gait + c_ctrl + c_smooth + c_contact + c_ang + c_zvel + c_post);
  }
};

RewardBreakdown total_reward(const SimState& state, const ContactState& contact,
                             std::span<const double> action, std::span<const double> a_prev,
                             const GaitClock& clock, const MorphologySpec& spec);

}  // namespace gaitforge
