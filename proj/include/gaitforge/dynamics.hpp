#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <span>
#include <utility>
#include <vector>

#include "gaitforge/model.hpp"

namespace gaitforge {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using WrenchMatrix = Eigen::Matrix<double, Eigen::Dynamic, 6, Eigen::RowMajor>;

struct SimState {
  Eigen::Vector3d base_pos = Eigen::Vector3d::Zero();
  Eigen::Quaterniond base_quat = Eigen::Quaterniond::Identity();
  Eigen::VectorXd q_joints;
  Eigen::Vector3d base_linvel = Eigen::Vector3d::Zero();  // world frame
  Eigen::Vector3d base_angvel = Eigen::Vector3d::Zero();  // body frame
  Eigen::VectorXd qd_joints;
  double time = 0.0;
};

// Exact (bitwise) equality, used by determinism checks.
bool identical(const SimState& a, const SimState& b);

struct ContactState {
  // One row per body: [torque about the body COM (3), force (3)], world axes.
  WrenchMatrix wrenches;
  // Lowest point of each leg's foot spheres above the ground plane.
  Eigen::VectorXd foot_heights;
};

struct BodyPose {
  Eigen::Vector3d pos;
  Eigen::Quaterniond quat;
};

// torques[i] = clip(action[i], -1, 1) * gear[i]. Rejects wrong lengths
// (kDimensionMismatch) and non-finite entries (kInvalidInput).
Eigen::VectorXd apply_action(std::span<const double> action, const MorphologySpec& spec);

// Floating-base articulated body with penalty ground contact. Immutable after
// construction; every method is a pure function of its arguments, so one
// instance may be shared by any number of threads.
//
// Generalised velocity is [omega_world, base_linvel, qd]. Spatial quantities
// are expressed in world axes about the current base origin, which makes the
// composite inertia of a subtree a plain sum. The base velocity is recovered
// from the total spatial momentum after each position update, so momentum
// changes only through external forces.
class Dynamics {
 public:
  explicit Dynamics(const MorphologySpec& spec);

  int n_u() const { return static_cast<int>(joint_body_.size()); }
  int n_body() const { return static_cast<int>(bodies_.size()); }
  int n_legs() const { return n_legs_; }
  double total_mass() const { return total_mass_; }
  const PhysicsParams& physics() const { return physics_; }

  // One semi-implicit Euler step. Returns the new state and the contact state
  // evaluated during the step. Throws kNumericalBlowup when any state entry
  // leaves [-blowup_cap, blowup_cap] or turns non-finite.
  std::pair<SimState, ContactState> substep(const SimState& state,
                                            const Eigen::VectorXd& torques,
                                            double dt_sub) const;

  // frame_skip substeps holding the same torques.
  std::pair<SimState, ContactState> control_step(const SimState& state,
                                                 std::span<const double> action,
                                                 const MorphologySpec& spec) const;

  ContactState contacts(const SimState& state) const;

  // Total spatial momentum about the world origin, [angular; linear].
  Vector6d momentum(const SimState& state) const;

  std::vector<BodyPose> body_poses(const SimState& state) const;

  // State with the base at `height`, identity orientation, joints at q.
  SimState make_state(double height, const Eigen::VectorXd& q) const;

 private:
  struct Kinematics;

  void forward(const SimState& s, Kinematics& k) const;
  void composite(Kinematics& k) const;
  void contact_forces(const SimState& s, Kinematics& k, ContactState* out) const;
  void check_finite(const SimState& s) const;

  struct Body {
    int parent;
    bool revolute;
    int joint;  // actuator index or -1
    double mass;
    Eigen::Vector3d com;
    Eigen::Matrix3d inertia;
    Eigen::Vector3d joint_pos;
    Eigen::Matrix3d joint_rot;
    Eigen::Vector3d axis;
  };
  struct Sphere {
    int body;
    Eigen::Vector3d pos;
    double radius;
    int foot_leg;  // -1 unless a foot sphere
  };

  std::vector<Body> bodies_;
  std::vector<Sphere> spheres_;
  std::vector<int> joint_body_;
  std::vector<double> armature_;
  std::vector<std::pair<double, double>> limits_;
  int n_legs_ = 0;
  double total_mass_ = 0.0;
  PhysicsParams physics_;
};

}  // namespace gaitforge
