#pragma once

// Straight-line evaluation of the ten reward terms from raw inputs, kept
// free of any library helper so it can cross-check the reward module.

#include <cmath>
#include <vector>

namespace oracle {

struct Inputs {
  double v_x, v_z, z_torso, phi;
  double roll_rate, pitch_rate, yaw_rate;
  std::vector<double> foot_z, offsets;
  std::vector<double> action, a_prev, q, q_def;
  std::vector<double> wrench;  // n_body * 6, raw
  double v_star, sigma_v, z_min, z_max, duty, z_thr, contact_scale;
  double w_fwd, w_h, w_gb, w_gc, w_c_hat, w_s, w_cc, w_a, w_z, w_p;
};

struct Terms {
  double r_fwd, r_h, r_gb, c_g, c_c, c_s, c_cc, c_a, c_z, c_p, total;
  int n_errors;
};

inline Terms evaluate(const Inputs& in) {
  const double two_pi = 6.283185307179586476925286766559;
  Terms t{};

  double tent = 1.0 - std::fabs(in.v_x - in.v_star) / in.sigma_v;
  t.r_fwd = tent > 0.0 ? in.w_fwd * tent : 0.0;

  t.r_h = (in.z_torso >= in.z_min && in.z_torso <= in.z_max) ? in.w_h : 0.0;

  const int legs = static_cast<int>(in.foot_z.size());
  int errors = 0;
  for (int i = 0; i < legs; ++i) {
    double u = std::fmod(in.phi + in.offsets[i], two_pi);
    if (u < 0.0) u += two_pi;
    if (u >= two_pi) u = 0.0;
    const bool want = u < two_pi * in.duty;
    const bool have = in.foot_z[i] < in.z_thr;
    if (want != have) ++errors;
  }
  t.n_errors = errors;
  t.r_gb = in.w_gb * (1.0 - static_cast<double>(errors) / legs);
  t.c_g = in.w_gc * errors;

  const int n_u = static_cast<int>(in.action.size());
  double mag = 0.0, rough = 0.0;
  for (int i = 0; i < n_u; ++i) {
    mag += in.action[i] * in.action[i];
    rough += (in.action[i] - in.a_prev[i]) * (in.action[i] - in.a_prev[i]);
  }
  t.c_c = (in.w_c_hat / n_u) * mag;
  t.c_s = in.w_s * rough;

  double force = 0.0;
  for (double w : in.wrench) {
    double c = w * in.contact_scale;
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    force += c * c;
  }
  t.c_cc = in.w_cc * force;
  t.c_a = in.w_a * (in.roll_rate * in.roll_rate + in.pitch_rate * in.pitch_rate);
  t.c_z = in.w_z * in.v_z * in.v_z;

  double post = 0.0;
  for (int i = 0; i < n_u; ++i) post += (in.q[i] - in.q_def[i]) * (in.q[i] - in.q_def[i]);
  t.c_p = in.w_p * post;

  t.total = t.r_fwd + t.r_h + t.r_gb - t.c_g - t.c_c - t.c_s - t.c_cc - t.c_a - t.c_z - t.c_p;
  return t;
}

}  // namespace oracle
