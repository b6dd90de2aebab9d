#pragma once

#include <span>
#include <vector>

#include "gaitforge/dynamics.hpp"
#include "gaitforge/model.hpp"

namespace gaitforge {

enum class LegMode { kStance, kSwing };

struct LegPhase {
  LegMode mode = LegMode::kStance;
  double s = 0.0;  // progress through the current mode, [0, 1)
};

// Per-joint expansion of the morphology's CPG block.
struct CpgParams {
  double f_g = 1.25;
  double duty = 0.6;
  std::vector<double> offsets;
  double amp_hip = 0.0;
  double amp_knee = 0.0;
  double amp_ankle = 0.0;
  double amp_push = 0.0;
  std::vector<double> kp;
  std::vector<double> kd;
  double t_ramp = 0.5;
};

CpgParams cpg_params(const MorphologySpec& spec);

// Stance iff the wrapped phase falls below 2*pi*duty, the same test the
// reward uses for its target stance.
LegPhase leg_phase(double phi, double delta, double duty);

// Targets for the joints of one leg, root to tip.
std::vector<double> joint_targets(int leg, const LegPhase& phase, const CpgParams& params,
                                  const MorphologySpec& spec);

std::vector<double> pd_action(std::span<const double> q_targets, const SimState& state, double t,
                              const CpgParams& params, const MorphologySpec& spec);

// Full CPG action for the given state, elapsed time and gait phase.
std::vector<double> cpg_policy(const SimState& state, double t, double phi,
                               const CpgParams& params, const MorphologySpec& spec);

}  // namespace gaitforge
