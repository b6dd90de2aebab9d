#include "gaitforge/dynamics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gaitforge/error.hpp"

namespace gaitforge {
namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d rpy_matrix(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// Motion cross product v x m for spatial vectors [angular; linear].
Vector6d cross_motion(const Vector6d& v, const Vector6d& m) {
  Vector6d out;
  out.head<3>() = v.head<3>().cross(m.head<3>());
  out.tail<3>() = v.head<3>().cross(m.tail<3>()) + v.tail<3>().cross(m.head<3>());
  return out;
}

// Force cross product v x* f.
Vector6d cross_force(const Vector6d& v, const Vector6d& f) {
  Vector6d out;
  out.head<3>() = v.head<3>().cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = v.head<3>().cross(f.tail<3>());
  return out;
}

Matrix6d spatial_inertia(double m, const Eigen::Vector3d& c, const Eigen::Matrix3d& i_com) {
  const Eigen::Matrix3d cx = skew(c);
  Matrix6d out;
  out.topLeftCorner<3, 3>() = i_com + m * cx * cx.transpose();
  out.topRightCorner<3, 3>() = m * cx;
  out.bottomLeftCorner<3, 3>() = m * cx.transpose();
  out.bottomRightCorner<3, 3>() = m * Eigen::Matrix3d::Identity();
  return out;
}

Vector6d force_at(const Eigen::Vector3d& r, const Eigen::Vector3d& f) {
  Vector6d out;
  out << r.cross(f), f;
  return out;
}

}  // namespace

struct Dynamics::Kinematics {
  Eigen::Vector3d origin;  // base position, reference point of spatial vectors
  std::vector<Eigen::Matrix3d> rot;
  std::vector<Eigen::Vector3d> pos;
  std::vector<Eigen::Vector3d> com;  // relative to origin
  std::vector<Vector6d> axis;        // joint twist, revolute bodies only
  std::vector<Matrix6d> inertia;
  std::vector<Matrix6d> composite;
  std::vector<Vector6d> vel;
  std::vector<Vector6d> f_ext;
  Vector6d base_vel;

  explicit Kinematics(std::size_t n)
      : rot(n), pos(n), com(n), axis(n), inertia(n), composite(n), vel(n),
        f_ext(n, Vector6d::Zero()) {}
};

bool identical(const SimState& a, const SimState& b) {
  return a.base_pos == b.base_pos && a.base_quat.coeffs() == b.base_quat.coeffs() &&
         a.q_joints == b.q_joints && a.base_linvel == b.base_linvel &&
         a.base_angvel == b.base_angvel && a.qd_joints == b.qd_joints && a.time == b.time;
}

Eigen::VectorXd apply_action(std::span<const double> action, const MorphologySpec& spec) {
  if (static_cast<int>(action.size()) != spec.n_u()) {
    throw Error(ErrorCode::kDimensionMismatch, "action has " + std::to_string(action.size()) +
                                                   " entries, expected " +
                                                   std::to_string(spec.n_u()));
  }
  Eigen::VectorXd torques(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i])) {
      throw Error(ErrorCode::kInvalidInput, "action entry " + std::to_string(i) + " is not finite");
    }
    torques[i] = std::clamp(action[i], -1.0, 1.0) * spec.gear[i];
  }
  return torques;
}

Dynamics::Dynamics(const MorphologySpec& spec)
    : armature_(spec.armature),
      limits_(spec.joint_limits),
      n_legs_(spec.n_legs),
      physics_(spec.physics) {
  if (spec.bodies.empty()) throw Error(ErrorCode::kValidation, "model has no bodies");
  for (std::size_t i = 0; i < spec.bodies.size(); ++i) {
    const BodyDef& d = spec.bodies[i];
    if (i > 0 && (d.parent < 0 || d.parent >= static_cast<int>(i))) {
      throw Error(ErrorCode::kValidation, "body " + d.name + " has an invalid parent");
    }
    Body b;
    b.parent = i == 0 ? -1 : d.parent;
    b.revolute = i > 0 && d.joint == JointType::kRevolute;
    b.joint = -1;
    if (b.revolute) {
      b.joint = static_cast<int>(joint_body_.size());
      joint_body_.push_back(static_cast<int>(i));
    }
    b.mass = d.mass;
    b.com = d.com;
    b.inertia = d.inertia.asDiagonal();
    b.joint_pos = d.joint_pos;
    b.joint_rot = rpy_matrix(d.joint_rpy);
    b.axis = d.axis.normalized();
    bodies_.push_back(b);
    total_mass_ += d.mass;
    for (const ContactSphere& c : d.spheres) {
      spheres_.push_back({static_cast<int>(i), c.pos, c.radius, c.foot ? d.leg : -1});
    }
  }
  const auto n = joint_body_.size();
  if (armature_.size() != n) armature_.assign(n, 0.0);
  if (limits_.size() != n) {
    limits_.assign(n, {-std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()});
  }
}

SimState Dynamics::make_state(double height, const Eigen::VectorXd& q) const {
  SimState s;
  s.base_pos = {0.0, 0.0, height};
  s.q_joints = q;
  s.qd_joints = Eigen::VectorXd::Zero(q.size());
  return s;
}

void Dynamics::forward(const SimState& s, Kinematics& k) const {
  if (s.q_joints.size() != n_u() || s.qd_joints.size() != n_u()) {
    throw Error(ErrorCode::kDimensionMismatch, "state joint vectors do not match the model");
  }
  k.origin = s.base_pos;
  const Eigen::Matrix3d r0 = s.base_quat.toRotationMatrix();
  k.base_vel << r0 * s.base_angvel, s.base_linvel;
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const Body& b = bodies_[i];
    if (i == 0) {
      k.rot[0] = r0;
      k.pos[0] = s.base_pos;
      k.vel[0] = k.base_vel;
    } else {
      const Eigen::Matrix3d& rp = k.rot[b.parent];
      const Eigen::Matrix3d rj = rp * b.joint_rot;
      k.pos[i] = k.pos[b.parent] + rp * b.joint_pos;
      k.vel[i] = k.vel[b.parent];
      if (b.revolute) {
        const double q = s.q_joints[b.joint];
        k.rot[i] = rj * Eigen::AngleAxisd(q, b.axis).toRotationMatrix();
        const Eigen::Vector3d a = rj * b.axis;
        k.axis[i] << a, (k.pos[i] - k.origin).cross(a);
        k.vel[i] += k.axis[i] * s.qd_joints[b.joint];
      } else {
        k.rot[i] = rj;
      }
    }
    k.com[i] = k.pos[i] - k.origin + k.rot[i] * b.com;
    k.inertia[i] =
        spatial_inertia(b.mass, k.com[i], k.rot[i] * b.inertia * k.rot[i].transpose());
  }
}

void Dynamics::composite(Kinematics& k) const {
  for (std::size_t i = 0; i < bodies_.size(); ++i) k.composite[i] = k.inertia[i];
  for (std::size_t i = bodies_.size(); i-- > 1;) {
    k.composite[bodies_[i].parent] += k.composite[i];
  }
}

void Dynamics::contact_forces(const SimState& s, Kinematics& k, ContactState* out) const {
  (void)s;
  const PhysicsParams& p = physics_;
  if (out != nullptr) {
    out->wrenches = WrenchMatrix::Zero(n_body(), 6);
    out->foot_heights =
        Eigen::VectorXd::Constant(n_legs_, std::numeric_limits<double>::infinity());
  }
  for (auto& f : k.f_ext) f.setZero();
  for (const Sphere& sp : spheres_) {
    const Eigen::Vector3d center = k.pos[sp.body] + k.rot[sp.body] * sp.pos;
    const double bottom = center.z() - sp.radius;
    if (out != nullptr && sp.foot_leg >= 0) {
      double& h = out->foot_heights[sp.foot_leg];
      h = std::min(h, bottom);
    }
    if (bottom >= 0.0) continue;
    const Eigen::Vector3d point(center.x(), center.y(), bottom);
    const Eigen::Vector3d r = point - k.origin;
    const Vector6d& v = k.vel[sp.body];
    const Eigen::Vector3d pv = v.tail<3>() + v.head<3>().cross(r);
    const double normal = p.contact_stiffness * (-bottom) - p.contact_damping * pv.z();
    if (normal <= 0.0) continue;
    Eigen::Vector2d tangent = -p.friction_damping * pv.head<2>();
    const double cap = p.friction_coeff * normal;
    const double t_norm = tangent.norm();
    if (t_norm > cap) tangent *= cap / t_norm;
    const Eigen::Vector3d force(tangent.x(), tangent.y(), normal);
    k.f_ext[sp.body] += force_at(r, force);
    if (out != nullptr) {
      const Eigen::Vector3d lever = point - (k.origin + k.com[sp.body]);
      out->wrenches.row(sp.body).head<3>() += lever.cross(force).transpose();
      out->wrenches.row(sp.body).tail<3>() += force.transpose();
    }
  }
}

void Dynamics::check_finite(const SimState& s) const {
  const double cap = physics_.blowup_cap;
  const auto bad = [cap](const auto& v) {
    return !v.allFinite() || v.cwiseAbs().maxCoeff() > cap;
  };
  if (bad(s.base_pos) || bad(s.base_quat.coeffs()) || bad(s.base_linvel) ||
      bad(s.base_angvel) || (n_u() > 0 && (bad(s.q_joints) || bad(s.qd_joints)))) {
    throw Error(ErrorCode::kNumericalBlowup, "simulation state diverged");
  }
}

std::pair<SimState, ContactState> Dynamics::substep(const SimState& s,
                                                    const Eigen::VectorXd& torques,
                                                    double dt) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidInput, "substep needs dt > 0");
  if (torques.size() != n_u()) {
    throw Error(ErrorCode::kDimensionMismatch, "torque vector does not match the model");
  }
  const int nb = n_body();
  const int nu = n_u();
  const int nv = 6 + nu;

  Kinematics k(nb);
  forward(s, k);
  composite(k);
  ContactState contact;
  contact_forces(s, k, &contact);

  // Bias forces: velocity products, gravity and contact, via one RNEA sweep
  // with zero generalised acceleration.
  const Eigen::Vector3d gravity(0.0, 0.0, -physics_.gravity);
  const Eigen::Vector3d omega = k.base_vel.head<3>();
  const Eigen::Vector3d lin = k.base_vel.tail<3>();
  std::vector<Vector6d> acc(nb);
  std::vector<Vector6d> force(nb);
  Vector6d external = Vector6d::Zero();
  for (int i = 0; i < nb; ++i) {
    const Body& b = bodies_[i];
    if (i == 0) {
      acc[0] << Eigen::Vector3d::Zero(), -omega.cross(lin);
    } else {
      acc[i] = acc[b.parent];
      if (b.revolute) {
        acc[i] += cross_motion(k.vel[i], k.axis[i]) * s.qd_joints[b.joint];
      }
    }
    const Vector6d f_grav = force_at(k.com[i], b.mass * gravity);
    external += f_grav + k.f_ext[i];
    force[i] = k.inertia[i] * acc[i] + cross_force(k.vel[i], k.inertia[i] * k.vel[i]) - f_grav -
               k.f_ext[i];
  }
  for (int i = nb; i-- > 1;) force[bodies_[i].parent] += force[i];

  Eigen::VectorXd rhs(nv);
  rhs.head<6>() = -force[0];
  for (int j = 0; j < nu; ++j) {
    const int bi = joint_body_[j];
    const double q = s.q_joints[j];
    double tau = torques[j] - physics_.joint_damping * s.qd_joints[j];
    if (q > limits_[j].second) tau -= physics_.limit_stiffness * (q - limits_[j].second);
    if (q < limits_[j].first) tau -= physics_.limit_stiffness * (q - limits_[j].first);
    rhs[6 + j] = tau - k.axis[bi].dot(force[bi]);
  }

  // Mass matrix (composite rigid body).
  Eigen::MatrixXd mass(nv, nv);
  mass.setZero();
  mass.topLeftCorner<6, 6>() = k.composite[0];
  for (int j = 0; j < nu; ++j) {
    const int bi = joint_body_[j];
    const Vector6d f = k.composite[bi] * k.axis[bi];
    mass(6 + j, 6 + j) = k.axis[bi].dot(f) + armature_[j];
    mass.block<6, 1>(0, 6 + j) = f;
    mass.block<1, 6>(6 + j, 0) = f.transpose();
    for (int a = bodies_[bi].parent; a > 0; a = bodies_[a].parent) {
      if (!bodies_[a].revolute) continue;
      const int ja = bodies_[a].joint;
      mass(6 + ja, 6 + j) = mass(6 + j, 6 + ja) = k.axis[a].dot(f);
    }
  }

  Eigen::VectorXd nu_vec(nv);
  nu_vec << k.base_vel, s.qd_joints;
  const Eigen::VectorXd accel = mass.ldlt().solve(rhs);
  const Eigen::VectorXd nu_next = nu_vec + dt * accel;
  const Vector6d momentum = mass.topRows<6>() * nu_vec;

  SimState next;
  next.qd_joints = nu_next.tail(nu);
  next.q_joints = s.q_joints + dt * next.qd_joints;
  next.base_pos = s.base_pos + dt * nu_next.segment<3>(3);
  const Eigen::Vector3d w_next = nu_next.head<3>();
  const double angle = w_next.norm() * dt;
  if (angle > 0.0) {
    next.base_quat = Eigen::Quaterniond(Eigen::AngleAxisd(angle, w_next.normalized())) *
                     s.base_quat;
  } else {
    next.base_quat = s.base_quat;
  }
  next.base_quat.normalize();
  next.time = s.time + dt;

  // Momentum balance about the moving base origin, then recover the base
  // velocity at the new configuration.
  Vector6d target;
  target.tail<3>() = momentum.tail<3>() + dt * external.tail<3>();
  target.head<3>() = momentum.head<3>() + dt * external.head<3>() -
                     (next.base_pos - s.base_pos).cross(target.tail<3>());

  next.base_linvel.setZero();
  next.base_angvel.setZero();
  Kinematics k2(nb);
  forward(next, k2);
  composite(k2);
  Vector6d residual = target;
  for (int j = 0; j < nu; ++j) {
    const int bi = joint_body_[j];
    residual -= k2.composite[bi] * k2.axis[bi] * next.qd_joints[j];
  }
  const Vector6d base = k2.composite[0].llt().solve(residual);
  next.base_angvel = k2.rot[0].transpose() * base.head<3>();
  next.base_linvel = base.tail<3>();

  check_finite(next);
  return {std::move(next), std::move(contact)};
}

std::pair<SimState, ContactState> Dynamics::control_step(const SimState& state,
                                                         std::span<const double> action,
                                                         const MorphologySpec& spec) const {
  const Eigen::VectorXd torques = apply_action(action, spec);
  std::pair<SimState, ContactState> out{state, ContactState{}};
  for (int i = 0; i < physics_.frame_skip; ++i) {
    out = substep(out.first, torques, physics_.dt_sub);
  }
  return out;
}

ContactState Dynamics::contacts(const SimState& state) const {
  Kinematics k(n_body());
  forward(state, k);
  ContactState out;
  contact_forces(state, k, &out);
  return out;
}

Vector6d Dynamics::momentum(const SimState& state) const {
  Kinematics k(n_body());
  forward(state, k);
  composite(k);
  Vector6d h = k.composite[0] * k.base_vel;
  for (int j = 0; j < n_u(); ++j) {
    const int bi = joint_body_[j];
    h += k.composite[bi] * k.axis[bi] * state.qd_joints[j];
  }
  h.head<3>() += state.base_pos.cross(h.tail<3>());
  return h;
}

std::vector<BodyPose> Dynamics::body_poses(const SimState& state) const {
  Kinematics k(n_body());
  forward(state, k);
  std::vector<BodyPose> out;
  out.reserve(bodies_.size());
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    out.push_back({k.pos[i], Eigen::Quaterniond(k.rot[i]).normalized()});
  }
  return out;
}

}  // namespace gaitforge
