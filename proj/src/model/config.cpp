#include "gaitforge/config.hpp"

#include <json.hpp>

#include "gaitforge/error.hpp"

namespace gaitforge {
namespace {

using nlohmann::json;

const char* const kRoleNames[3] = {"hip", "knee", "ankle"};

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_document(const MorphologySpec& s) {
  json bodies = json::array();
  for (const BodyDef& b : s.bodies) {
    json spheres = json::array();
    for (const ContactSphere& c : b.spheres) {
      spheres.push_back({{"pos", vec3(c.pos)}, {"radius", c.radius}, {"foot", c.foot}});
    }
    bodies.push_back({{"name", b.name},
                      {"parent", b.parent},
                      {"leg", b.leg},
                      {"mass", b.mass},
                      {"com", vec3(b.com)},
                      {"inertia", vec3(b.inertia)},
                      {"joint", b.joint == JointType::kRevolute ? "revolute" : "fixed"},
                      {"joint_pos", vec3(b.joint_pos)},
                      {"joint_rpy", vec3(b.joint_rpy)},
                      {"axis", vec3(b.axis)},
                      {"spheres", spheres}});
  }
  json limits = json::array();
  for (const auto& [lo, hi] : s.joint_limits) limits.push_back({lo, hi});

  const RewardWeights& w = s.weights;
  const PhysicsParams& p = s.physics;
  json gains = json::object();
  for (int r = 0; r < 3; ++r) {
    gains[kRoleNames[r]] = {{"kp", s.cpg.gains[r].kp}, {"kd", s.cpg.gains[r].kd}};
  }
  return {
      {"schema_version", kMorphologySchemaVersion},
      {"name", s.name},
      {"n_legs", s.n_legs},
      {"joints_per_leg", s.joints_per_leg},
      {"horizon", s.horizon},
      {"bodies", bodies},
      {"actuators",
       {{"gear", s.gear}, {"q_def", s.q_def}, {"limits", limits}, {"armature", s.armature}}},
      {"gait", {{"f_g", s.f_g}, {"duty", s.duty}, {"offsets", s.offsets}}},
      {"reward",
       {{"v_star", s.v_star},
        {"sigma_v", s.sigma_v},
        {"z_thr", s.z_thr},
        {"healthy_z", {s.healthy_z.first, s.healthy_z.second}},
        {"contact_scale", s.contact_scale},
        {"weights",
         {{"w_fwd", w.w_fwd},
          {"w_h", w.w_h},
          {"w_gb", w.w_gb},
          {"w_gc", w.w_gc},
          {"w_c_hat", w.w_c_hat},
          {"w_s", w.w_s},
          {"w_cc", w.w_cc},
          {"w_a", w.w_a},
          {"w_z", w.w_z},
          {"w_p", w.w_p}}}}},
      {"physics",
       {{"dt_sub", p.dt_sub},
        {"frame_skip", p.frame_skip},
        {"gravity", p.gravity},
        {"contact_stiffness", p.contact_stiffness},
        {"contact_damping", p.contact_damping},
        {"friction_damping", p.friction_damping},
        {"friction_coeff", p.friction_coeff},
        {"joint_damping", p.joint_damping},
        {"limit_stiffness", p.limit_stiffness},
        {"blowup_cap", p.blowup_cap}}},
      {"cpg",
       {{"amp_hip", s.cpg.amp_hip},
        {"amp_knee", s.cpg.amp_knee},
        {"amp_ankle", s.cpg.amp_ankle},
        {"amp_push", s.cpg.amp_push},
        {"t_ramp", s.cpg.t_ramp},
        {"gains", gains}}},
  };
}

// Collects every missing or mistyped field instead of stopping at the first.
class Reader {
 public:
  template <typename T>
  T get(const json& obj, const char* key, const std::string& where) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!obj.is_object() || !obj.contains(key)) {
      problems_.push_back("missing field '" + path + "'");
      return T{};
    }
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back("field '" + path + "' has the wrong type");
      return T{};
    }
  }

  Eigen::Vector3d vec(const json& obj, const char* key, const std::string& where) {
    const auto v = get<std::vector<double>>(obj, key, where);
    if (v.size() != 3) {
      if (obj.is_object() && obj.contains(key)) {
        problems_.push_back("field '" + where + "." + key + "' must have 3 entries");
      }
      return Eigen::Vector3d::Zero();
    }
    return {v[0], v[1], v[2]};
  }

  const json& sub(const json& obj, const char* key, const std::string& where) {
    static const json kEmpty = json::object();
    if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_object()) {
      problems_.push_back("missing section '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
      return kEmpty;
    }
    return obj.at(key);
  }

  std::vector<std::string>& problems() { return problems_; }

 private:
  std::vector<std::string> problems_;
};

MorphologySpec from_document(const json& doc) {
  Reader r;
  MorphologySpec s;
  s.name = r.get<std::string>(doc, "name", "");
  s.n_legs = r.get<int>(doc, "n_legs", "");
  s.joints_per_leg = r.get<int>(doc, "joints_per_leg", "");
  s.horizon = r.get<int>(doc, "horizon", "");

  if (doc.contains("bodies") && doc.at("bodies").is_array()) {
    const json& arr = doc.at("bodies");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& jb = arr[i];
      const std::string where = "bodies[" + std::to_string(i) + "]";
      BodyDef b;
      b.name = r.get<std::string>(jb, "name", where);
      b.parent = r.get<int>(jb, "parent", where);
      b.leg = r.get<int>(jb, "leg", where);
      b.mass = r.get<double>(jb, "mass", where);
      b.com = r.vec(jb, "com", where);
      b.inertia = r.vec(jb, "inertia", where);
      const auto joint = r.get<std::string>(jb, "joint", where);
      if (joint == "revolute") {
        b.joint = JointType::kRevolute;
      } else if (joint == "fixed") {
        b.joint = JointType::kFixed;
      } else if (!joint.empty()) {
        r.problems().push_back("field '" + where + ".joint' must be 'fixed' or 'revolute'");
      }
      b.joint_pos = r.vec(jb, "joint_pos", where);
      b.joint_rpy = r.vec(jb, "joint_rpy", where);
      b.axis = r.vec(jb, "axis", where);
      if (jb.contains("spheres") && jb.at("spheres").is_array()) {
        for (const json& js : jb.at("spheres")) {
          ContactSphere c;
          c.pos = r.vec(js, "pos", where + ".spheres");
          c.radius = r.get<double>(js, "radius", where + ".spheres");
          c.foot = r.get<bool>(js, "foot", where + ".spheres");
          b.spheres.push_back(c);
        }
      }
      s.bodies.push_back(std::move(b));
    }
  } else {
    r.problems().push_back("missing array 'bodies'");
  }

  const json& act = r.sub(doc, "actuators", "");
  s.gear = r.get<std::vector<double>>(act, "gear", "actuators");
  s.q_def = r.get<std::vector<double>>(act, "q_def", "actuators");
  s.armature = r.get<std::vector<double>>(act, "armature", "actuators");
  for (const auto& lim : r.get<std::vector<std::vector<double>>>(act, "limits", "actuators")) {
    if (lim.size() != 2) {
      r.problems().push_back("each actuators.limits entry must be [lo, hi]");
      continue;
    }
    s.joint_limits.emplace_back(lim[0], lim[1]);
  }

  const json& gait = r.sub(doc, "gait", "");
  s.f_g = r.get<double>(gait, "f_g", "gait");
  s.duty = r.get<double>(gait, "duty", "gait");
  s.offsets = r.get<std::vector<double>>(gait, "offsets", "gait");

  const json& rw = r.sub(doc, "reward", "");
  s.v_star = r.get<double>(rw, "v_star", "reward");
  s.sigma_v = r.get<double>(rw, "sigma_v", "reward");
  s.z_thr = r.get<double>(rw, "z_thr", "reward");
  s.contact_scale = r.get<double>(rw, "contact_scale", "reward");
  const auto hz = r.get<std::vector<double>>(rw, "healthy_z", "reward");
  if (hz.size() == 2) {
    s.healthy_z = {hz[0], hz[1]};
  } else if (rw.contains("healthy_z")) {
    r.problems().push_back("reward.healthy_z must be [z_min, z_max]");
  }
  const json& jw = r.sub(rw, "weights", "reward");
  RewardWeights& w = s.weights;
  w.w_fwd = r.get<double>(jw, "w_fwd", "reward.weights");
  w.w_h = r.get<double>(jw, "w_h", "reward.weights");
  w.w_gb = r.get<double>(jw, "w_gb", "reward.weights");
  w.w_gc = r.get<double>(jw, "w_gc", "reward.weights");
  w.w_c_hat = r.get<double>(jw, "w_c_hat", "reward.weights");
  w.w_s = r.get<double>(jw, "w_s", "reward.weights");
  w.w_cc = r.get<double>(jw, "w_cc", "reward.weights");
  w.w_a = r.get<double>(jw, "w_a", "reward.weights");
  w.w_z = r.get<double>(jw, "w_z", "reward.weights");
  w.w_p = r.get<double>(jw, "w_p", "reward.weights");

  const json& jp = r.sub(doc, "physics", "");
  PhysicsParams& p = s.physics;
  p.dt_sub = r.get<double>(jp, "dt_sub", "physics");
  p.frame_skip = r.get<int>(jp, "frame_skip", "physics");
  p.gravity = r.get<double>(jp, "gravity", "physics");
  p.contact_stiffness = r.get<double>(jp, "contact_stiffness", "physics");
  p.contact_damping = r.get<double>(jp, "contact_damping", "physics");
  p.friction_damping = r.get<double>(jp, "friction_damping", "physics");
  p.friction_coeff = r.get<double>(jp, "friction_coeff", "physics");
  p.joint_damping = r.get<double>(jp, "joint_damping", "physics");
  p.limit_stiffness = r.get<double>(jp, "limit_stiffness", "physics");
  p.blowup_cap = r.get<double>(jp, "blowup_cap", "physics");

  const json& jc = r.sub(doc, "cpg", "");
  s.cpg.amp_hip = r.get<double>(jc, "amp_hip", "cpg");
  s.cpg.amp_knee = r.get<double>(jc, "amp_knee", "cpg");
  s.cpg.amp_ankle = r.get<double>(jc, "amp_ankle", "cpg");
  s.cpg.amp_push = r.get<double>(jc, "amp_push", "cpg");
  s.cpg.t_ramp = r.get<double>(jc, "t_ramp", "cpg");
  const json& jg = r.sub(jc, "gains", "cpg");
  for (int role = 0; role < 3; ++role) {
    const json& g = r.sub(jg, kRoleNames[role], "cpg.gains");
    s.cpg.gains[role].kp = r.get<double>(g, "kp", std::string("cpg.gains.") + kRoleNames[role]);
    s.cpg.gains[role].kd = r.get<double>(g, "kd", std::string("cpg.gains.") + kRoleNames[role]);
  }

  if (!r.problems().empty()) {
    std::string msg = "invalid morphology config:";
    for (const auto& p2 : r.problems()) msg += "\n  - " + p2;
    throw Error(ErrorCode::kValidation, msg);
  }
  return s;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kInvalidInput, "override must look like key=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidInput, "override index '" + part + "' is not a number");
      }
      if (idx >= node->size()) {
        throw Error(ErrorCode::kInvalidInput, "override index out of range in '" + key + "'");
      }
      next = &(*node)[idx];
    } else if (node->is_object() && node->contains(part)) {
      next = &(*node)[part];
    } else {
      throw Error(ErrorCode::kInvalidInput, "override key '" + key + "' does not exist");
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

}  // namespace

std::string serialize_spec(const MorphologySpec& spec, int indent) {
  return to_document(spec).dump(indent);
}

MorphologySpec parse_spec(std::string_view text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("morphology config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw Error(ErrorCode::kSchemaMismatch, "morphology config lacks 'schema_version'");
  }
  if (!doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != kMorphologySchemaVersion) {
    throw Error(ErrorCode::kSchemaMismatch,
                "unsupported morphology schema_version " + doc.at("schema_version").dump() +
                    " (expected " + std::to_string(kMorphologySchemaVersion) + ")");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  MorphologySpec spec = from_document(doc);
  require_valid(spec);
  return spec;
}

}  // namespace gaitforge
