#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gaitforge {

inline constexpr int kMorphologySchemaVersion = 1;

enum class JointType { kFixed, kRevolute };

// Role of an actuated joint inside its leg, counted root-to-tip.
enum class JointRole { kHip = 0, kKnee = 1, kAnkle = 2 };

struct ContactSphere {
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();  // body frame
  double radius = 0.0;
  bool foot = false;  // participates in the leg's foot height

  bool operator==(const ContactSphere&) const = default;
};

// One rigid link. Body 0 is the floating torso; every other body hangs off
// `parent` through either a fixed or a revolute joint whose frame sits at
// `joint_pos` (parent frame) rotated by `joint_rpy`.
struct BodyDef {
  std::string name;
  int parent = -1;
  int leg = -1;  // -1 for the torso
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Vector3d inertia = Eigen::Vector3d::Zero();  // principal, about com
  JointType joint = JointType::kFixed;
  Eigen::Vector3d joint_pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d joint_rpy = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  std::vector<ContactSphere> spheres;

  bool operator==(const BodyDef&) const = default;
};

struct PhysicsParams {
  double dt_sub = 0.002;
  int frame_skip = 25;
  double gravity = 9.81;
  double contact_stiffness = 2.0e4;  // N/m
  double contact_damping = 200.0;    // N*s/m
  double friction_damping = 2000.0;  // N*s/m, tangential viscous slope
  double friction_coeff = 1.0;
  double joint_damping = 0.1;     // N*m*s/rad
  double limit_stiffness = 500.0;  // N*m/rad beyond a joint limit
  double blowup_cap = 1.0e6;

  bool operator==(const PhysicsParams&) const = default;
};

struct RewardWeights {
  double w_fwd = 1.0;
  double w_h = 0.5;
  double w_gb = 0.5;
  double w_gc = 0.1;
  double w_c_hat = 0.6;  // divided by n_u to get the effective control weight
  double w_s = 0.05;
  double w_cc = 5.0e-4;
  double w_a = 0.05;
  double w_z = 0.1;
  double w_p = 0.05;

  bool operator==(const RewardWeights&) const = default;
};

struct PdGains {
  double kp = 0.0;
  double kd = 0.0;

  bool operator==(const PdGains&) const = default;
};

// CPG block as stored in a morphology file; expanded per joint by the cpg
// module.
struct CpgConfig {
  double amp_hip = 0.3;
  double amp_knee = 0.4;
  double amp_ankle = 0.25;
  double amp_push = 0.1;
  std::array<PdGains, 3> gains{};  // indexed by JointRole
  double t_ramp = 0.5;

  bool operator==(const CpgConfig&) const = default;
};

struct MorphologySpec {
  std::string name;
  int n_legs = 0;
  int joints_per_leg = 0;
  std::vector<BodyDef> bodies;

  // Per actuator, in body order (legs in canonical order, root to tip).
  std::vector<double> gear;
  std::vector<double> q_def;
  std::vector<std::pair<double, double>> joint_limits;
  std::vector<double> armature;

  std::pair<double, double> healthy_z{0.0, 0.0};
  double v_star = 1.0;
  double sigma_v = 0.5;
  double f_g = 1.25;
  double duty = 0.6;
  std::vector<double> offsets;
  double z_thr = 0.08;
  double contact_scale = 1.0;  // raw wrench multiplier before the [-1,1] clip
  RewardWeights weights;
  int horizon = 1000;

  PhysicsParams physics;
  CpgConfig cpg;

  int n_u() const { return n_legs * joints_per_leg; }
  int n_body() const { return static_cast<int>(bodies.size()); }
  int obs_dim() const { return 1 + 4 + n_u() + 3 + 3 + n_u() + 6 * n_body() + 2; }
  double control_dt() const { return physics.dt_sub * physics.frame_skip; }
  double w_ctrl() const { return weights.w_c_hat / n_u(); }

  bool operator==(const MorphologySpec&) const = default;
};

// Canonical names of the built-in robots, in a fixed order.
inline constexpr std::array<std::string_view, 4> kBuiltinMorphologies = {
    "queen", "bastion", "tick", "leaper"};

// Alternating tripod for legs ordered L1,R1,L2,R2,L3,R3. Tripod A is
// {L1, R2, L3}.
std::vector<double> tripod_offsets(int n_legs = 6);

// Diagonal-pair trot for legs ordered FL,FR,HL,HR.
std::vector<double> trot_offsets();

MorphologySpec builtin_morphology(std::string_view name);

// Every violated invariant, one human-readable line each. Empty when valid.
std::vector<std::string> validate(const MorphologySpec& spec);

// Throws kValidation listing every problem.
void require_valid(const MorphologySpec& spec);

// Resolves, in order: an existing file path, <name>.json under
// $GAITFORGE_CONFIG_DIR, then the built-ins (case-insensitive). Overrides are
// "dotted.key=value" assignments applied to the config document before
// validation.
MorphologySpec load_morphology(std::string_view name_or_path,
                               const std::vector<std::string>& overrides = {});

// Stable 64-bit FNV-1a of the canonical serialisation.
std::uint64_t spec_hash(const MorphologySpec& spec);

}  // namespace gaitforge
