#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gaitforge/config.hpp"
#include "gaitforge/error.hpp"
#include "gaitforge/model.hpp"

namespace gaitforge {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_builtin(const std::string& name) {
  return std::find(kBuiltinMorphologies.begin(), kBuiltinMorphologies.end(), name) !=
         kBuiltinMorphologies.end();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_finite_nonneg(std::vector<std::string>& out, const char* what, double v) {
  if (!std::isfinite(v) || v < 0.0) out.push_back(std::string(what) + " must be >= 0");
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownMorphology: return "UnknownMorphology";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kNumericalBlowup: return "NumericalBlowup";
    case ErrorCode::kNotReset: return "NotReset";
    case ErrorCode::kIo: return "IOError";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kEmptyReport: return "EmptyReport";
  }
  return "Unknown";
}

std::vector<std::string> validate(const MorphologySpec& s) {
  std::vector<std::string> e;
  if (s.name.empty()) e.push_back("name must not be empty");
  if (s.n_legs != 4 && s.n_legs != 6) e.push_back("n_legs must be 4 or 6");
  if (s.joints_per_leg != 2 && s.joints_per_leg != 3) e.push_back("joints_per_leg must be 2 or 3");
  const int n_u = s.n_legs * s.joints_per_leg;

  if (s.bodies.empty()) {
    e.push_back("bodies must contain at least the torso");
  } else if (s.bodies[0].parent != -1) {
    e.push_back("bodies[0] must be the root (parent -1)");
  }
  int revolute = 0;
  std::vector<int> joints_in_leg(std::max(s.n_legs, 0), 0);
  std::vector<int> feet_in_leg(std::max(s.n_legs, 0), 0);
  for (std::size_t i = 0; i < s.bodies.size(); ++i) {
    const BodyDef& b = s.bodies[i];
    const std::string tag = "bodies[" + std::to_string(i) + "] (" + b.name + ")";
    if (i > 0 && (b.parent < 0 || b.parent >= static_cast<int>(i))) {
      e.push_back(tag + ": parent must precede the body");
    }
    if (!(b.mass > 0.0)) e.push_back(tag + ": mass must be > 0");
    if (!(b.inertia.minCoeff() > 0.0)) e.push_back(tag + ": inertia must be > 0");
    if (i > 0 && (b.leg < 0 || b.leg >= s.n_legs)) e.push_back(tag + ": leg index out of range");
    if (i == 0 && b.joint != JointType::kFixed) e.push_back(tag + ": root has no joint");
    if (b.joint == JointType::kRevolute) {
      ++revolute;
      if (std::abs(b.axis.norm() - 1.0) > 1e-9) e.push_back(tag + ": axis must be a unit vector");
      if (b.leg >= 0 && b.leg < s.n_legs) ++joints_in_leg[b.leg];
    }
    for (const ContactSphere& c : b.spheres) {
      if (!(c.radius > 0.0)) e.push_back(tag + ": sphere radius must be > 0");
      if (c.foot && b.leg >= 0 && b.leg < s.n_legs) ++feet_in_leg[b.leg];
    }
  }
  if (revolute != n_u) {
    e.push_back("revolute joint count " + std::to_string(revolute) + " != n_u " +
                std::to_string(n_u));
  }
  for (int leg = 0; leg < s.n_legs; ++leg) {
    if (joints_in_leg[leg] != s.joints_per_leg) {
      e.push_back("leg " + std::to_string(leg) + " must have joints_per_leg revolute joints");
    }
    if (feet_in_leg[leg] == 0) e.push_back("leg " + std::to_string(leg) + " has no foot sphere");
  }

  const auto sized = [&](const char* what, std::size_t n) {
    if (static_cast<int>(n) != n_u) e.push_back(std::string(what) + " must have n_u entries");
    return static_cast<int>(n) == n_u;
  };
  const bool gear_ok = sized("gear", s.gear.size());
  const bool qdef_ok = sized("q_def", s.q_def.size());
  const bool lim_ok = sized("joint_limits", s.joint_limits.size());
  sized("armature", s.armature.size());
  if (gear_ok) {
    for (double g : s.gear) {
      if (!(g > 0.0)) {
        e.push_back("gear entries must be > 0");
        break;
      }
    }
  }
  for (double a : s.armature) {
    if (!(a >= 0.0)) {
      e.push_back("armature entries must be >= 0");
      break;
    }
  }
  if (lim_ok) {
    for (int i = 0; i < n_u; ++i) {
      const auto [lo, hi] = s.joint_limits[i];
      if (!(lo < hi)) e.push_back("joint_limits[" + std::to_string(i) + "] needs lo < hi");
      if (qdef_ok && !(s.q_def[i] >= lo && s.q_def[i] <= hi)) {
        e.push_back("q_def[" + std::to_string(i) + "] outside joint limits");
      }
    }
  }

  if (static_cast<int>(s.offsets.size()) != s.n_legs) e.push_back("offsets must have n_legs entries");
  for (double o : s.offsets) {
    if (!(o >= 0.0 && o < kTwoPi)) {
      e.push_back("offsets must lie in [0, 2pi)");
      break;
    }
  }
  if (!(s.duty > 0.0 && s.duty < 1.0)) e.push_back("duty must lie in (0, 1)");
  if (!(s.healthy_z.first < s.healthy_z.second)) e.push_back("healthy_z needs z_min < z_max");
  if (!(s.sigma_v > 0.0)) e.push_back("sigma_v must be > 0");
  if (!(s.f_g > 0.0)) e.push_back("f_g must be > 0");
  if (!(s.z_thr > 0.0)) e.push_back("z_thr must be > 0");
  if (!(s.contact_scale > 0.0)) e.push_back("contact_scale must be > 0");
  if (s.horizon <= 0) e.push_back("horizon must be > 0");

  const RewardWeights& w = s.weights;
  check_finite_nonneg(e, "w_fwd", w.w_fwd);
  check_finite_nonneg(e, "w_h", w.w_h);
  check_finite_nonneg(e, "w_gb", w.w_gb);
  check_finite_nonneg(e, "w_gc", w.w_gc);
  check_finite_nonneg(e, "w_c_hat", w.w_c_hat);
  check_finite_nonneg(e, "w_s", w.w_s);
  check_finite_nonneg(e, "w_cc", w.w_cc);
  check_finite_nonneg(e, "w_a", w.w_a);
  check_finite_nonneg(e, "w_z", w.w_z);
  check_finite_nonneg(e, "w_p", w.w_p);

  const PhysicsParams& p = s.physics;
  if (!(p.dt_sub > 0.0)) e.push_back("physics.dt_sub must be > 0");
  if (p.frame_skip <= 0) e.push_back("physics.frame_skip must be > 0");
  check_finite_nonneg(e, "physics.gravity", p.gravity);
  check_finite_nonneg(e, "physics.contact_stiffness", p.contact_stiffness);
  check_finite_nonneg(e, "physics.contact_damping", p.contact_damping);
  check_finite_nonneg(e, "physics.friction_damping", p.friction_damping);
  check_finite_nonneg(e, "physics.friction_coeff", p.friction_coeff);
  check_finite_nonneg(e, "physics.joint_damping", p.joint_damping);
  check_finite_nonneg(e, "physics.limit_stiffness", p.limit_stiffness);
  if (!(p.blowup_cap > 0.0)) e.push_back("physics.blowup_cap must be > 0");

  const CpgConfig& c = s.cpg;
  check_finite_nonneg(e, "cpg.amp_hip", c.amp_hip);
  check_finite_nonneg(e, "cpg.amp_knee", c.amp_knee);
  check_finite_nonneg(e, "cpg.amp_ankle", c.amp_ankle);
  check_finite_nonneg(e, "cpg.amp_push", c.amp_push);
  check_finite_nonneg(e, "cpg.t_ramp", c.t_ramp);
  for (const PdGains& g : c.gains) {
    check_finite_nonneg(e, "cpg kp", g.kp);
    check_finite_nonneg(e, "cpg kd", g.kd);
  }
  // The CPG envelope around q_def must stay inside the joint limits.
  if (qdef_ok && lim_ok && s.joints_per_leg > 0) {
    for (int i = 0; i < n_u; ++i) {
      const int role = i % s.joints_per_leg;
      double lo = s.q_def[i];
      double hi = s.q_def[i];
      if (role == 0) {
        lo -= c.amp_hip;
        hi += c.amp_hip;
      } else if (role == 1) {
        hi += std::max(c.amp_knee, c.amp_push);
      } else {
        hi += std::max(c.amp_ankle, 0.5 * c.amp_push);
      }
      if (lo < s.joint_limits[i].first || hi > s.joint_limits[i].second) {
        e.push_back("cpg envelope of joint " + std::to_string(i) + " exceeds its limits");
      }
    }
  }
  return e;
}

void require_valid(const MorphologySpec& spec) {
  const auto problems = validate(spec);
  if (problems.empty()) return;
  std::string msg = "morphology '" + spec.name + "' failed validation:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw Error(ErrorCode::kValidation, msg);
}

MorphologySpec load_morphology(std::string_view name_or_path,
                               const std::vector<std::string>& overrides) {
  namespace fs = std::filesystem;
  const std::string arg(name_or_path);
  const std::string key = lower(arg);

  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) {
    return parse_spec(read_file(arg), overrides);
  }
  if (const char* dir = std::getenv("GAITFORGE_CONFIG_DIR"); dir != nullptr && *dir != '\0') {
    const fs::path candidate = fs::path(dir) / (key + ".json");
    if (fs::is_regular_file(candidate, ec)) return parse_spec(read_file(candidate), overrides);
  }
  if (!is_builtin(key)) {
    throw Error(ErrorCode::kUnknownMorphology, "unknown morphology '" + arg +
                                                   "' (expected queen, bastion, tick, leaper "
                                                   "or a config file path)");
  }
  MorphologySpec spec = builtin_morphology(key);
  if (!overrides.empty()) return parse_spec(serialize_spec(spec, -1), overrides);
  require_valid(spec);
  return spec;
}

std::uint64_t spec_hash(const MorphologySpec& spec) {
  const std::string text = serialize_spec(spec, -1);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace gaitforge
