#include <doctest.h>

#include <cmath>
#include <vector>

#include "gaitforge/env.hpp"
#include "gaitforge/error.hpp"
#include "generators.hpp"

using namespace gaitforge;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidInput;
}

std::vector<std::vector<double>> script(int steps, int n, std::uint64_t seed) {
  gen::Rng r(seed);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < steps; ++i) out.push_back(r.vec(n, -1.2, 1.2));
  return out;
}

}  // namespace

TEST_CASE("observation layout") {
  for (auto name : kBuiltinMorphologies) {
    CAPTURE(name);
    Env env(builtin_morphology(name));
    const auto obs = env.reset(3);
    const MorphologySpec& s = env.spec();
    REQUIRE(static_cast<int>(obs.size()) == s.obs_dim());
    const int nu = s.n_u();
    CHECK(obs[0] == 0.5 * (s.healthy_z.first + s.healthy_z.second));
    CHECK(obs[1] == 1.0);
    CHECK(obs[2] == 0.0);
    for (int i = 0; i < nu; ++i) {
      CHECK(obs[5 + i] == env.state().q_joints[i]);
      CHECK(std::abs(obs[5 + i] - s.q_def[i]) <= 0.01);
    }
    for (int i = 0; i < 6 + nu; ++i) CHECK(obs[5 + nu + i] == 0.0);
    const std::size_t contact = 11 + 2 * nu;
    for (std::size_t i = contact; i < contact + 6 * s.n_body(); ++i) {
      CHECK(std::abs(obs[i]) <= 1.0);
    }
    CHECK(obs[obs.size() - 2] == 0.0);
    CHECK(obs[obs.size() - 1] == 1.0);
  }
}

TEST_CASE("observe clips wrenches and encodes the phase") {
  const MorphologySpec s = builtin_morphology("bastion");
  const Dynamics dyn(s);
  SimState st = dyn.make_state(0.5, Eigen::Map<const Eigen::VectorXd>(s.q_def.data(), 12));
  st.base_pos.x() = 123.0;
  st.base_pos.y() = -55.0;
  ContactState c;
  c.wrenches = WrenchMatrix::Zero(s.n_body(), 6);
  c.wrenches(3, 1) = 3.7;
  c.wrenches(5, 4) = -0.25;
  c.foot_heights = Eigen::VectorXd::Zero(6);
  const auto obs = observe(st, c, std::numbers::pi / 2, s);
  REQUIRE(obs.size() == 151u);
  const int contact = 11 + 2 * 12;
  CHECK(obs[contact + 3 * 6 + 1] == 1.0);
  CHECK(obs[contact + 5 * 6 + 4] == -0.25);
  CHECK(obs[149] == doctest::Approx(1.0));
  CHECK(obs[150] == doctest::Approx(0.0));
  for (double x : obs) {
    CHECK(x != 123.0);
    CHECK(x != -55.0);
  }
}

TEST_CASE("reset is seeded") {
  Env a(builtin_morphology("queen"));
  Env b(builtin_morphology("queen"));
  CHECK(a.reset(17) == b.reset(17));
  CHECK(a.reset(17) != a.reset(18));
  const auto n = reset_noise(5, 1000);
  for (double x : n) {
    CHECK(x >= -0.01);
    CHECK(x <= 0.01);
  }
  CHECK(reset_noise(5, 10) == std::vector<double>(n.begin(), n.begin() + 10));
}

TEST_CASE("step contract errors") {
  Env env(builtin_morphology("tick"));
  const std::vector<double> zero(18, 0.0);
  CHECK(code_of([&] { env.step(zero); }) == ErrorCode::kNotReset);
  CHECK(code_of([&] { env.cpg_action(); }) == ErrorCode::kNotReset);
  env.reset(0);
  CHECK(code_of([&] { env.step(std::vector<double>(12, 0.0)); }) == ErrorCode::kDimensionMismatch);
  std::vector<double> nan = zero;
  nan[4] = std::nan("");
  CHECK(code_of([&] { env.step(nan); }) == ErrorCode::kInvalidInput);
  CHECK(env.step_index() == 0);
  CHECK_NOTHROW(env.step(zero));
  CHECK(env.step_index() == 1);
}

TEST_CASE("reward equals the breakdown and the clock advances per step") {
  Env env(builtin_morphology("leaper"));
  env.reset(2);
  GaitClock clock{0.0, env.spec().f_g};
  for (const auto& a : script(40, 12, 8)) {
    const StepResult r = env.step(a);
    clock = advance_clock(clock, env.spec().control_dt());
    CHECK(r.reward == r.info.breakdown.total);
    CHECK(std::abs(r.reward - r.info.breakdown.signed_sum()) < 1e-9);
    CHECK(r.info.phi == clock.phi);
    CHECK(r.obs[r.obs.size() - 2] == std::sin(clock.phi));
    CHECK(r.info.z_torso == r.obs[0]);
    CHECK(r.info.v_x == env.state().base_linvel.x());
    CHECK(static_cast<int>(r.info.breakdown.stance_target.size()) == 4);
    if (r.terminated) break;
  }
}

TEST_CASE("actions are clipped before the step and the smoothness cost") {
  Env a(builtin_morphology("bastion"));
  Env b(builtin_morphology("bastion"));
  a.reset(4);
  b.reset(4);
  std::vector<double> wild(12), tame(12);
  for (int i = 0; i < 12; ++i) {
    wild[i] = i % 2 ? 5.0 : -3.0;
    tame[i] = i % 2 ? 1.0 : -1.0;
  }
  const auto ra = a.step(wild);
  const auto rb = b.step(tame);
  CHECK(ra.obs == rb.obs);
  CHECK(ra.reward == rb.reward);
  CHECK(ra.info.breakdown.c_smooth == doctest::Approx(0.05 * 12));
}

TEST_CASE("identical seeds and scripts give identical trajectories") {
  for (auto name : kBuiltinMorphologies) {
    Env a(builtin_morphology(name));
    Env b(builtin_morphology(name));
    a.reset(99);
    b.reset(99);
    const int nu = a.act_dim();
    bool same = true;
    for (const auto& act : script(60, nu, 123)) {
      if (a.done()) break;
      const auto ra = a.step(act);
      const auto rb = b.step(act);
      same = same && ra.obs == rb.obs && ra.reward == rb.reward &&
             ra.terminated == rb.terminated && identical(a.state(), b.state());
    }
    CHECK(same);
  }
}

TEST_CASE("dropping from above the healthy range terminates early") {
  for (auto name : kBuiltinMorphologies) {
    CAPTURE(name);
    const MorphologySpec base = builtin_morphology(name);
    Env env(base);
    env.reset(0);
    const std::vector<double> zero(env.act_dim(), 0.0);
    // First step from the reset pose, collapsing with zero torque.
    int steps = 0;
    StepResult r;
    do {
      r = env.step(zero);
      ++steps;
    } while (!r.terminated && !r.truncated);
    CHECK(r.terminated);
    CHECK_FALSE(r.truncated);
    CHECK(steps < base.horizon);
    CHECK(r.info.z_torso < base.healthy_z.first);
    CHECK(code_of([&] { env.step(zero); }) == ErrorCode::kNotReset);
    env.reset(1);
    CHECK_NOTHROW(env.step(zero));
  }
}

TEST_CASE("horizon truncates and termination wins on the final step") {
  MorphologySpec s = builtin_morphology("bastion");
  s.horizon = 5;
  Env env(s);
  env.reset(0);
  StepResult r;
  for (int i = 0; i < 5; ++i) {
    CHECK_FALSE(env.done());
    r = env.step(env.cpg_action());
  }
  CHECK(r.truncated);
  CHECK_FALSE(r.terminated);
  CHECK(r.info.step == 5);
  CHECK(env.done());

  MorphologySpec t = builtin_morphology("bastion");
  t.horizon = 1;
  t.healthy_z = {0.0, 0.3};  // reset height is above z_max
  Env both(t);
  both.reset(0);
  r = both.step(std::vector<double>(12, 0.0));
  CHECK(r.terminated);
  CHECK_FALSE(r.truncated);
}

TEST_CASE("numerical blowup ends the episode as terminated") {
  MorphologySpec s = builtin_morphology("tick");
  s.physics.blowup_cap = 1.0;
  Env env(s);
  env.reset(0);
  std::vector<double> hard(18, 1.0);
  StepResult r;
  bool blew = false;
  for (int i = 0; i < 50 && !env.done(); ++i) {
    r = env.step(hard);
    blew = blew || r.info.blowup;
  }
  CHECK(blew);
  CHECK(r.terminated);
  CHECK(r.reward == 0.0);
  CHECK(r.obs == env.last_obs());
  CHECK(env.done());
}

TEST_CASE("zero policy earns the healthy bonus while upright") {
  Env env(builtin_morphology("queen"));
  env.reset(0);
  const std::vector<double> zero(18, 0.0);
  for (int i = 0; i < 3; ++i) {
    const auto r = env.step(zero);
    if (r.terminated) break;
    CHECK(r.info.breakdown.r_h == env.spec().weights.w_h);
    CHECK(r.info.breakdown.c_ctrl == 0.0);
  }
}
