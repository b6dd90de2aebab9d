#include <doctest.h>

#include <cmath>
#include <vector>

#include "gaitforge/cpg.hpp"
#include "gaitforge/dynamics.hpp"
#include "gaitforge/error.hpp"
#include "gaitforge/model.hpp"
#include "generators.hpp"

using namespace gaitforge;

namespace {

Eigen::VectorXd q_def(const MorphologySpec& s) {
  return Eigen::Map<const Eigen::VectorXd>(s.q_def.data(), s.n_u());
}

// A lone box torso with one contact sphere under its centre.
MorphologySpec brick() {
  MorphologySpec s;
  s.name = "brick";
  BodyDef b;
  b.name = "torso";
  b.mass = 10.0;
  b.inertia = {0.2, 0.3, 0.4};
  b.spheres.push_back({{0.0, 0.0, -0.1}, 0.05, false});
  s.bodies.push_back(b);
  return s;
}

}  // namespace

TEST_CASE("apply_action clips then scales by gear") {
  const MorphologySpec s = builtin_morphology("bastion");
  std::vector<double> a(12, 0.0);
  CHECK(apply_action(a, s).isZero(0.0));
  a[3] = 1.0;
  a[4] = 2.5;
  a[5] = -7.0;
  a[6] = 0.25;
  const Eigen::VectorXd t = apply_action(a, s);
  CHECK(t[3] == s.gear[3]);
  CHECK(t[4] == s.gear[4]);
  CHECK(t[5] == -s.gear[5]);
  CHECK(t[6] == 0.25 * s.gear[6]);
  std::vector<double> short_a(11, 0.0);
  CHECK_THROWS_WITH_AS(apply_action(short_a, s), doctest::Contains("expected 12"), Error);
  a[0] = std::nan("");
  try {
    apply_action(a, s);
    FAIL("NaN accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidInput);
  }
}

TEST_CASE("free fall follows the ballistic solution") {
  for (auto name : kBuiltinMorphologies) {
    CAPTURE(name);
    const MorphologySpec s = builtin_morphology(name);
    const Dynamics dyn(s);
    SimState st = dyn.make_state(2.0 + s.healthy_z.second, q_def(s));
    const double z0 = st.base_pos.z();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.n_u());
    const double dt = 0.002;
    const double g = s.physics.gravity;
    const double mass = dyn.total_mass();
    for (int i = 0; i < 50; ++i) {
      const Vector6d h0 = dyn.momentum(st);
      auto [next, contact] = dyn.substep(st, zero, dt);
      CHECK(contact.wrenches.isZero(0.0));
      const Vector6d h1 = dyn.momentum(next);
      CHECK(h1[5] - h0[5] == doctest::Approx(-mass * g * dt).epsilon(1e-9));
      st = next;
    }
    const double t = 0.1;
    CHECK(st.time == doctest::Approx(t));
    CHECK(std::abs(st.base_pos.z() - (z0 - 0.5 * g * t * t)) < 1e-3);
    CHECK(std::abs(st.base_pos.x()) < 1e-12);
    CHECK((st.q_joints - q_def(s)).cwiseAbs().maxCoeff() < 1e-9);
  }
  const MorphologySpec b = brick();
  const Dynamics dyn(b);
  SimState st = dyn.make_state(2.0, {});
  for (int i = 0; i < 50; ++i) st = dyn.substep(st, {}, 0.002).first;
  CHECK(std::abs(st.base_pos.z() - 1.95095) < 1e-3);
}

TEST_CASE("zero gravity rest state is an equilibrium") {
  for (auto name : kBuiltinMorphologies) {
    MorphologySpec s = builtin_morphology(name);
    s.physics.gravity = 0.0;
    const Dynamics dyn(s);
    const SimState st = dyn.make_state(3.0, q_def(s));
    auto next = dyn.substep(st, Eigen::VectorXd::Zero(s.n_u()), 0.002).first;
    next.time = st.time;
    CHECK(identical(next, st));
  }
}

TEST_CASE("zero gravity conserves momentum and keeps the quaternion unit") {
  gen::Rng r(7);
  for (auto name : kBuiltinMorphologies) {
    CAPTURE(name);
    MorphologySpec s = builtin_morphology(name);
    s.physics.gravity = 0.0;
    const Dynamics dyn(s);
    SimState st = dyn.make_state(5.0, q_def(s));
    st.base_quat = Eigen::Quaterniond(r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1),
                                      r.uniform(-1, 1)).normalized();
    st.base_linvel = {r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)};
    st.base_angvel = {r.uniform(-2, 2), r.uniform(-2, 2), r.uniform(-2, 2)};
    for (int i = 0; i < s.n_u(); ++i) st.qd_joints[i] = r.uniform(-3, 3);
    double worst_h = 0.0;
    double worst_q = 0.0;
    for (int k = 0; k < 300; ++k) {
      Eigen::VectorXd tau(s.n_u());
      for (int i = 0; i < s.n_u(); ++i) tau[i] = r.uniform(-1, 1) * s.gear[i];
      const Vector6d h0 = dyn.momentum(st);
      st = dyn.substep(st, tau, 0.002).first;
      worst_h = std::max(worst_h, (dyn.momentum(st) - h0).cwiseAbs().maxCoeff());
      worst_q = std::max(worst_q, std::abs(st.base_quat.norm() - 1.0));
    }
    CHECK(worst_h < 1e-9);
    CHECK(worst_q < 1e-9);
  }
}

TEST_CASE("a brick settles with contact force equal to its weight") {
  const MorphologySpec b = brick();
  const Dynamics dyn(b);
  SimState st = dyn.make_state(0.2, {});
  ContactState c;
  for (int i = 0; i < 2000; ++i) std::tie(st, c) = dyn.substep(st, {}, 0.002);
  const double weight = 10.0 * 9.81;
  CHECK(std::abs(c.wrenches(0, 5) - weight) < 0.05 * weight);
  // Penetration k * d = m g
  CHECK(st.base_pos.z() == doctest::Approx(0.15 - weight / 2.0e4).epsilon(1e-3));
}

TEST_CASE("standing robots carry their weight through contact") {
  for (auto name : kBuiltinMorphologies) {
    CAPTURE(name);
    const MorphologySpec s = builtin_morphology(name);
    const Dynamics dyn(s);
    const CpgParams params = cpg_params(s);
    SimState st = dyn.make_state(0.5 * (s.healthy_z.first + s.healthy_z.second), q_def(s));
    ContactState c;
    for (int k = 0; k < 60; ++k) {
      const auto a = pd_action(s.q_def, st, 10.0, params, s);
      std::tie(st, c) = dyn.control_step(st, a, s);
    }
    const double weight = dyn.total_mass() * s.physics.gravity;
    CHECK(std::abs(c.wrenches.col(5).sum() - weight) < 0.05 * weight);
    CHECK(st.base_pos.z() > s.healthy_z.first);
    CHECK(c.foot_heights.minCoeff() > -0.05);
  }
}

TEST_CASE("wrench rows of bodies out of contact are exactly zero") {
  gen::Rng r(11);
  for (auto name : kBuiltinMorphologies) {
    CAPTURE(name);
    const MorphologySpec s = builtin_morphology(name);
    const Dynamics dyn(s);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd q = q_def(s);
      for (int i = 0; i < s.n_u(); ++i) q[i] += r.uniform(-0.3, 0.3);
      SimState st = dyn.make_state(r.uniform(s.healthy_z.first - 0.2, s.healthy_z.second), q);
      st.base_quat = Eigen::Quaterniond(1.0, r.uniform(-0.2, 0.2), r.uniform(-0.2, 0.2), 0.0)
                         .normalized();
      const ContactState c = dyn.contacts(st);
      REQUIRE(c.wrenches.rows() == s.n_body());
      const auto poses = dyn.body_poses(st);
      for (int b = 0; b < s.n_body(); ++b) {
        bool touching = false;
        for (const ContactSphere& sp : s.bodies[b].spheres) {
          const Eigen::Vector3d centre = poses[b].pos + poses[b].quat * sp.pos;
          touching = touching || centre.z() - sp.radius < 0.0;
        }
        if (!touching) CHECK(c.wrenches.row(b).isZero(0.0));
      }
    }
  }
}

TEST_CASE("control step runs frame_skip substeps and is deterministic") {
  const MorphologySpec s = builtin_morphology("leaper");
  const Dynamics dyn(s);
  const SimState st = dyn.make_state(0.6, q_def(s));
  std::vector<double> a(12);
  gen::Rng r(3);
  for (double& x : a) x = r.uniform(-1, 1);
  const auto one = dyn.control_step(st, a, s);
  const auto two = dyn.control_step(st, a, s);
  CHECK(one.first.time == doctest::Approx(0.05));
  CHECK(identical(one.first, two.first));
  CHECK(one.second.wrenches == two.second.wrenches);

  SimState manual = st;
  const Eigen::VectorXd tau = apply_action(a, s);
  ContactState last;
  for (int i = 0; i < 25; ++i) std::tie(manual, last) = dyn.substep(manual, tau, 0.002);
  CHECK(identical(manual, one.first));
  CHECK(last.wrenches == one.second.wrenches);
}

TEST_CASE("substep rejects bad input and reports blowup") {
  MorphologySpec s = builtin_morphology("tick");
  const Dynamics dyn(s);
  const SimState st = dyn.make_state(0.3, q_def(s));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(18);
  CHECK_THROWS_AS(dyn.substep(st, zero, 0.0), Error);
  CHECK_THROWS_AS(dyn.substep(st, Eigen::VectorXd::Zero(3), 0.002), Error);

  SimState bad = st;
  bad.base_linvel.x() = std::nan("");
  try {
    dyn.substep(bad, zero, 0.002);
    FAIL("no blowup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumericalBlowup);
  }
  s.physics.blowup_cap = 10.0;
  const Dynamics capped(s);
  SimState fast = st;
  fast.qd_joints[0] = 50.0;
  try {
    capped.substep(fast, zero, 0.002);
    FAIL("no blowup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumericalBlowup);
  }
}
