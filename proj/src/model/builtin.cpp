// Built-in robots. Masses, link lengths, gears and gains are non-canonical
// desk-scale choices; every one of them can be overridden from a config file.

#include <cmath>
#include <numbers>

#include "gaitforge/error.hpp"
#include "gaitforge/model.hpp"

namespace gaitforge {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d box_inertia(double m, double lx, double ly, double lz) {
  return {m / 12.0 * (ly * ly + lz * lz), m / 12.0 * (lx * lx + lz * lz),
          m / 12.0 * (lx * lx + ly * ly)};
}

// Thin rod of length `len` along body axis `along` (0=x, 2=z).
Eigen::Vector3d rod_inertia(double m, double len, double radius, int along) {
  const double perp = m * (3.0 * radius * radius + len * len) / 12.0;
  const double axial = 0.5 * m * radius * radius;
  Eigen::Vector3d out = Eigen::Vector3d::Constant(perp);
  out[along] = axial;
  return out;
}

BodyDef make_torso(double m, double lx, double ly, double lz, double r) {
  BodyDef torso;
  torso.name = "torso";
  torso.mass = m;
  torso.inertia = box_inertia(m, lx, ly, lz);
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      torso.spheres.push_back(
          {{sx * 0.5 * lx, sy * 0.5 * ly, -0.5 * lz + r}, r, false});
    }
  }
  torso.spheres.push_back({{0.0, 0.0, -0.5 * lz + r}, r, false});
  return torso;
}

struct Mount {
  std::string tag;  // "l1", "r2", ...
  Eigen::Vector3d pos;
  double yaw;  // direction of the leg's outward axis
  bool left;
};

// Six mounts ordered L1,R1,L2,R2,L3,R3, legs splayed by `splay` at the ends.
std::vector<Mount> hexapod_mounts(double half_len, double half_width, double z,
                                  double splay) {
  std::vector<Mount> mounts;
  const double xs[3] = {half_len, 0.0, -half_len};
  const double splays[3] = {splay, 0.0, -splay};
  for (int row = 0; row < 3; ++row) {
    const std::string n = std::to_string(row + 1);
    mounts.push_back({"l" + n, {xs[row], half_width, z}, 0.5 * kPi - splays[row], true});
    mounts.push_back({"r" + n, {xs[row], -half_width, z}, -0.5 * kPi + splays[row], false});
  }
  return mounts;
}

struct LinkDims {
  double len;
  double mass;
  double radius;
};

// Yaw-sweeping hip, positive angle moves the foot forward on either side.
BodyDef hip_yaw_link(const std::string& name, int leg, const Mount& m, const LinkDims& d) {
  BodyDef b;
  b.name = name;
  b.parent = 0;
  b.leg = leg;
  b.mass = d.mass;
  b.com = {0.5 * d.len, 0.0, 0.0};
  b.inertia = rod_inertia(d.mass, d.len, d.radius, 0);
  b.joint = JointType::kRevolute;
  b.joint_pos = m.pos;
  b.joint_rpy = {0.0, 0.0, m.yaw};
  b.axis = {0.0, 0.0, m.left ? -1.0 : 1.0};
  return b;
}

// Pitch joint about -y of the leg frame: positive lifts the link outward/up.
BodyDef pitch_link(const std::string& name, int parent, int leg, const Eigen::Vector3d& at,
                   const LinkDims& d, bool horizontal) {
  BodyDef b;
  b.name = name;
  b.parent = parent;
  b.leg = leg;
  b.mass = d.mass;
  b.com = horizontal ? Eigen::Vector3d(0.5 * d.len, 0.0, 0.0)
                     : Eigen::Vector3d(0.0, 0.0, -0.5 * d.len);
  b.inertia = rod_inertia(d.mass, d.len, d.radius, horizontal ? 0 : 2);
  b.joint = JointType::kRevolute;
  b.joint_pos = at;
  b.axis = {0.0, -1.0, 0.0};
  return b;
}

BodyDef foot_body(const std::string& name, int parent, int leg, const Eigen::Vector3d& at,
                  double mass, double radius) {
  BodyDef b;
  b.name = name;
  b.parent = parent;
  b.leg = leg;
  b.mass = mass;
  const double i = 0.4 * mass * radius * radius;
  b.inertia = Eigen::Vector3d::Constant(i);
  b.joint = JointType::kFixed;
  b.joint_pos = at;
  b.spheres.push_back({Eigen::Vector3d::Zero(), radius, true});
  return b;
}

struct Hexapod3Dims {
  double torso_mass, torso_lx, torso_ly, torso_lz, torso_sphere;
  double mount_half_len, mount_half_width, splay;
  LinkDims coxa, femur, tibia;
  double foot_mass, foot_radius;
  double femur_up;      // default femur elevation, rad
  double tibia_out;     // default tibia angle outward of vertical, rad
  double gear_hip, gear_knee, gear_ankle;
};

void add_hexapod3_legs(MorphologySpec& s, const Hexapod3Dims& d) {
  const auto mounts = hexapod_mounts(d.mount_half_len, d.mount_half_width, 0.0, d.splay);
  for (int leg = 0; leg < 6; ++leg) {
    const Mount& m = mounts[leg];
    const int coxa = static_cast<int>(s.bodies.size());
    s.bodies.push_back(hip_yaw_link(m.tag + "_coxa", leg, m, d.coxa));
    s.bodies.push_back(pitch_link(m.tag + "_femur", coxa, leg, {d.coxa.len, 0, 0}, d.femur, true));
    s.bodies.push_back(
        pitch_link(m.tag + "_tibia", coxa + 1, leg, {d.femur.len, 0, 0}, d.tibia, false));
    s.bodies.push_back(foot_body(m.tag + "_foot", coxa + 2, leg, {0, 0, -d.tibia.len},
                                 d.foot_mass, d.foot_radius));
    s.gear.insert(s.gear.end(), {d.gear_hip, d.gear_knee, d.gear_ankle});
    // Tibia angle is relative to the femur, which already tilts it outward.
    s.q_def.insert(s.q_def.end(), {0.0, d.femur_up, d.tibia_out - d.femur_up});
  }
}

void finish_limits(MorphologySpec& s, double hip_range, double other_range) {
  s.joint_limits.clear();
  for (int i = 0; i < s.n_u(); ++i) {
    const double r = (i % s.joints_per_leg == 0) ? hip_range : other_range;
    s.joint_limits.emplace_back(s.q_def[i] - r, s.q_def[i] + r);
  }
}

void set_gains(MorphologySpec& s, double hip_scale, double knee_scale, double ankle_scale) {
  // kp = 40 * scale, kd = 3 * scale per joint class. The PD torque is held for
  // a whole control step, so armature is sized for kd * dt / inertia = 1.5,
  // which with kp / kd = 40 / 3 settles a free joint in about two steps.
  const double scales[3] = {hip_scale, knee_scale, ankle_scale};
  for (int r = 0; r < 3; ++r) {
    s.cpg.gains[r] = {40.0 * scales[r], 3.0 * scales[r]};
  }
  const double dt = s.control_dt();
  s.armature.assign(s.n_u(), 0.0);
  for (int i = 0; i < s.n_u(); ++i) {
    const double kd = s.cpg.gains[i % s.joints_per_leg].kd;
    s.armature[i] = std::max(0.01, kd * dt / 1.5);
  }
}

MorphologySpec make_hexapod3(const std::string& name, const Hexapod3Dims& d) {
  MorphologySpec s;
  s.name = name;
  s.n_legs = 6;
  s.joints_per_leg = 3;
  s.bodies.push_back(
      make_torso(d.torso_mass, d.torso_lx, d.torso_ly, d.torso_lz, d.torso_sphere));
  add_hexapod3_legs(s, d);
  s.offsets = tripod_offsets(6);
  return s;
}

MorphologySpec make_queen() {
  Hexapod3Dims d{};
  d.torso_mass = 40.0;
  d.torso_lx = 1.2;
  d.torso_ly = 0.6;
  d.torso_lz = 0.3;
  d.torso_sphere = 0.05;
  d.mount_half_len = 0.5;
  d.mount_half_width = 0.3;
  d.splay = 0.35;
  d.coxa = {0.15, 2.0, 0.06};
  d.femur = {0.6, 3.0, 0.05};
  d.tibia = {1.35, 3.0, 0.04};
  d.foot_mass = 0.5;
  d.foot_radius = 0.05;
  d.femur_up = 0.4;
  d.tibia_out = 0.31;
  d.gear_hip = 300.0;
  d.gear_knee = 400.0;
  d.gear_ankle = 300.0;
  MorphologySpec s = make_hexapod3("queen", d);
  s.healthy_z = {0.6, 1.6};
  s.z_thr = 0.08;
  s.cpg.amp_hip = 0.22;
  s.cpg.amp_knee = 0.4;
  s.cpg.amp_ankle = 0.25;
  s.cpg.amp_push = 0.1;
  set_gains(s, 40.0, 50.0, 40.0);
  finish_limits(s, 1.0, 1.2);
  return s;
}

MorphologySpec make_tick() {
  Hexapod3Dims d{};
  d.torso_mass = 8.0;
  d.torso_lx = 0.5;
  d.torso_ly = 0.35;
  d.torso_lz = 0.12;
  d.torso_sphere = 0.02;
  d.mount_half_len = 0.2;
  d.mount_half_width = 0.175;
  d.splay = 0.35;
  d.coxa = {0.06, 0.3, 0.02};
  d.femur = {0.2, 0.4, 0.02};
  d.tibia = {0.4, 0.4, 0.015};
  d.foot_mass = 0.1;
  d.foot_radius = 0.025;
  d.femur_up = 0.5;
  d.tibia_out = 0.47;
  d.gear_hip = 40.0;
  d.gear_knee = 50.0;
  d.gear_ankle = 40.0;
  MorphologySpec s = make_hexapod3("tick", d);
  s.healthy_z = {0.12, 0.45};
  s.z_thr = 0.04;
  s.cpg.amp_hip = 0.55;
  s.cpg.amp_knee = 0.4;
  s.cpg.amp_ankle = 0.25;
  s.cpg.amp_push = 0.1;
  set_gains(s, 5.0, 6.0, 5.0);
  finish_limits(s, 1.0, 1.2);
  return s;
}

MorphologySpec make_bastion() {
  MorphologySpec s;
  s.name = "bastion";
  s.n_legs = 6;
  s.joints_per_leg = 2;
  s.bodies.push_back(make_torso(25.0, 1.0, 0.6, 0.3, 0.04));
  const LinkDims femur{0.2, 1.5, 0.05};
  const LinkDims tibia{0.6, 1.5, 0.04};
  const double foot_radius = 0.04;
  const double tibia_out = 0.63;
  const auto mounts = hexapod_mounts(0.4, 0.3, 0.0, 0.35);
  for (int leg = 0; leg < 6; ++leg) {
    const Mount& m = mounts[leg];
    const int fem = static_cast<int>(s.bodies.size());
    s.bodies.push_back(hip_yaw_link(m.tag + "_femur", leg, m, femur));
    s.bodies.push_back(pitch_link(m.tag + "_tibia", fem, leg, {femur.len, 0, 0}, tibia, false));
    s.bodies.push_back(
        foot_body(m.tag + "_foot", fem + 1, leg, {0, 0, -tibia.len}, 0.3, foot_radius));
    s.gear.insert(s.gear.end(), {150.0, 150.0});
    s.q_def.insert(s.q_def.end(), {0.0, tibia_out});
  }
  s.offsets = tripod_offsets(6);
  s.healthy_z = {0.25, 0.8};
  s.z_thr = 0.08;
  s.cpg.amp_hip = 0.5;
  s.cpg.amp_knee = 0.4;
  s.cpg.amp_ankle = 0.0;
  s.cpg.amp_push = 0.1;
  set_gains(s, 20.0, 20.0, 0.0);
  finish_limits(s, 1.0, 0.9);
  return s;
}

MorphologySpec make_leaper() {
  MorphologySpec s;
  s.name = "leaper";
  s.n_legs = 4;
  s.joints_per_leg = 3;
  s.bodies.push_back(make_torso(12.0, 0.8, 0.35, 0.15, 0.03));
  const double thigh_up = 0.6;
  const LinkDims hip_mount{0.08, 0.4, 0.03};
  const LinkDims thigh{0.3, 1.0, 0.03};
  const LinkDims shank{0.3, 0.5, 0.02};
  const double foot_len = 0.12;
  const double r = 0.03;
  // FL, FR, HL, HR
  const double xs[4] = {0.32, 0.32, -0.32, -0.32};
  const double side[4] = {1.0, -1.0, 1.0, -1.0};
  const char* tags[4] = {"fl", "fr", "hl", "hr"};
  for (int leg = 0; leg < 4; ++leg) {
    const std::string tag = tags[leg];
    const int mount = static_cast<int>(s.bodies.size());

    BodyDef hm;
    hm.name = tag + "_hip_mount";
    hm.parent = 0;
    hm.leg = leg;
    hm.mass = hip_mount.mass;
    hm.com = {0.0, side[leg] * 0.5 * hip_mount.len, 0.0};
    hm.inertia = rod_inertia(hip_mount.mass, hip_mount.len, hip_mount.radius, 1);
    hm.joint = JointType::kFixed;
    hm.joint_pos = {xs[leg], side[leg] * 0.175, -0.05};
    s.bodies.push_back(hm);

    BodyDef th;
    th.name = tag + "_thigh";
    th.parent = mount;
    th.leg = leg;
    th.mass = thigh.mass;
    th.com = {0.0, 0.0, -0.5 * thigh.len};
    th.inertia = rod_inertia(thigh.mass, thigh.len, thigh.radius, 2);
    th.joint = JointType::kRevolute;
    th.joint_pos = {0.0, side[leg] * hip_mount.len, 0.0};
    th.axis = {0.0, -1.0, 0.0};  // positive swings the leg forward
    s.bodies.push_back(th);

    BodyDef sh;
    sh.name = tag + "_shank";
    sh.parent = mount + 1;
    sh.leg = leg;
    sh.mass = shank.mass;
    sh.com = {0.0, 0.0, -0.5 * shank.len};
    sh.inertia = rod_inertia(shank.mass, shank.len, shank.radius, 2);
    sh.joint = JointType::kRevolute;
    sh.joint_pos = {0.0, 0.0, -thigh.len};
    sh.axis = {0.0, 1.0, 0.0};  // positive folds the knee and lifts the foot
    s.bodies.push_back(sh);

    BodyDef ft;
    ft.name = tag + "_foot";
    ft.parent = mount + 2;
    ft.leg = leg;
    ft.mass = 0.2;
    ft.com = {0.5 * foot_len, 0.0, 0.0};
    ft.inertia = rod_inertia(0.2, foot_len, 0.02, 0);
    ft.joint = JointType::kRevolute;
    ft.joint_pos = {0.0, 0.0, -shank.len};
    ft.axis = {0.0, -1.0, 0.0};  // positive lifts the toe
    ft.spheres.push_back({Eigen::Vector3d::Zero(), r, true});
    s.bodies.push_back(ft);

    BodyDef toe;
    toe.name = tag + "_toe";
    toe.parent = mount + 3;
    toe.leg = leg;
    toe.mass = 0.1;
    toe.inertia = Eigen::Vector3d::Constant(0.4 * 0.1 * r * r);
    toe.joint = JointType::kFixed;
    toe.joint_pos = {foot_len, 0.0, 0.0};
    toe.spheres.push_back({Eigen::Vector3d::Zero(), r, true});
    s.bodies.push_back(toe);

    s.gear.insert(s.gear.end(), {60.0, 60.0, 30.0});
    s.q_def.insert(s.q_def.end(), {thigh_up, 2.0 * thigh_up, thigh_up});
  }
  s.offsets = trot_offsets();
  s.healthy_z = {0.25, 0.9};
  s.z_thr = 0.08;
  s.cpg.amp_hip = 0.45;
  s.cpg.amp_knee = 0.4;
  s.cpg.amp_ankle = 0.25;
  s.cpg.amp_push = 0.1;
  set_gains(s, 8.0, 8.0, 3.0);
  finish_limits(s, 1.0, 1.0);
  return s;
}

}  // namespace

std::vector<double> tripod_offsets(int n_legs) {
  if (n_legs != 6) {
    throw Error(ErrorCode::kValidation,
                "tripod offsets need 6 legs, got " + std::to_string(n_legs));
  }
  return {0.0, kPi, kPi, 0.0, 0.0, kPi};
}

std::vector<double> trot_offsets() { return {0.0, kPi, kPi, 0.0}; }

MorphologySpec builtin_morphology(std::string_view name) {
  MorphologySpec s;
  if (name == "queen") {
    s = make_queen();
  } else if (name == "bastion") {
    s = make_bastion();
  } else if (name == "tick") {
    s = make_tick();
  } else if (name == "leaper") {
    s = make_leaper();
  } else {
    throw Error(ErrorCode::kUnknownMorphology,
                "unknown morphology '" + std::string(name) + "'");
  }
  return s;
}

}  // namespace gaitforge
