#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "gaitforge/buffer.hpp"
#include "gaitforge/config.hpp"
#include "gaitforge/error.hpp"
#include "gaitforge/harness.hpp"
#include "gaitforge/policy.hpp"

using namespace gaitforge;
namespace fs = std::filesystem;

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

std::string tmp(const std::string& name) {
  return (fs::temp_directory_path() / ("gf_harness_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MorphologySpec short_bastion(int horizon) {
  MorphologySpec s = builtin_morphology("bastion");
  s.horizon = horizon;
  return s;
}

// Same script as the test server's "sine" mode.
class SinePolicy : public Policy {
 public:
  std::string name() const override { return "extern"; }
  void begin_episode(int, std::uint64_t) override { step_ = 0; }
  std::vector<double> act(const Env& env, const std::vector<double>&) override {
    std::vector<double> a(env.act_dim());
    for (std::uint32_t i = 0; i < a.size(); ++i) a[i] = 0.3 * std::sin(0.1 * step_ + i);
    ++step_;
    return a;
  }

 private:
  std::uint32_t step_ = 0;
};

std::string server(const std::string& mode) {
  return std::string(GF_POLICY_SERVER) + " --mode " + mode;
}

}  // namespace

TEST_CASE("episode seeds") {
  CHECK(episode_seeds(3, {}) == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(episode_seeds(0, {4, 9}) == std::vector<std::uint64_t>{4, 9});
  CHECK(episode_seeds(2, {4, 9}) == std::vector<std::uint64_t>{4, 9});
  CHECK(code_of([] { episode_seeds(3, {4, 9}); }) == ErrorCode::kInvalidInput);
  CHECK(episode_seeds(0, {}).empty());
}

TEST_CASE("empty evaluation is rejected") {
  CHECK(code_of([] { run_cpg(builtin_morphology("tick"), 0); }) == ErrorCode::kEmptyReport);
}

TEST_CASE("summary statistics use the population deviation") {
  EvalReport r;
  for (int i = 1; i <= 4; ++i) {
    EpisodeStats e;
    e.ret = i;
    e.length = 10 * i;
    e.displacement = 2.0 * i;
    e.compliance = i == 4 ? 1.0 : 0.0;
    e.tent_fraction = 0.5;
    e.survived = i % 2 == 0;
    r.episodes.push_back(e);
  }
  summarize(r);
  CHECK(r.mean_return == 2.5);
  CHECK(r.std_return == doctest::Approx(std::sqrt(1.25)));
  CHECK(r.mean_displacement == 5.0);
  CHECK(r.survival_rate == 0.5);
  CHECK(r.gait_compliance == doctest::Approx(0.4));
  CHECK(r.tent_fraction == doctest::Approx(0.5));
}

TEST_CASE("CPG evaluation is deterministic per seed") {
  const MorphologySpec s = short_bastion(80);
  const EvalReport a = run_cpg(s, 0, {3, 3, 5});
  const EvalReport b = run_cpg(s, 0, {3, 3, 5});
  CHECK(a == b);
  REQUIRE(a.episodes.size() == 3u);
  CHECK(a.episodes[0] == a.episodes[1]);
  CHECK(a.episodes[0].length == 80);
  CHECK(a.episodes[0].survived);
  CHECK(a.morphology == "bastion");
  CHECK(a.policy_name == "cpg");
  CHECK(run_cpg(s, 0, {3, 3}).std_return == 0.0);
}

TEST_CASE("CSV emission") {
  EvalReport empty;
  CHECK(csv_text(empty, true) == "step,mean_return,std_return,morphology,policy_name\n");
  const std::string p0 = tmp("empty.csv");
  emit_csv(empty, p0, false);
  CHECK(slurp(p0) == "step,mean_return,std_return,morphology,policy_name\n");

  EvalReport r = run_cpg(short_bastion(20), 5);
  r.step = 250000;
  const std::string text = csv_text(r, true);
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 7u);
  CHECK(rows[1].rfind("250000,", 0) == 0);
  CHECK(rows[1].find(",bastion,cpg") != std::string::npos);
  CHECK(rows[6].find("cpg:seed=4") != std::string::npos);
  double parsed = 0.0;
  REQUIRE(std::sscanf(rows[1].c_str(), "250000,%lf", &parsed) == 1);
  CHECK(parsed == r.mean_return);
  CHECK(csv_text(r, false).find("seed=") == std::string::npos);

  const std::string p1 = tmp("a.csv");
  const std::string p2 = tmp("b.csv");
  emit_csv(r, p1, true);
  emit_csv(run_cpg(short_bastion(20), 5), p2, true);
  emit_csv(r, p2, true);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(code_of([&] { emit_csv(r, "/nonexistent/dir/x.csv", false); }) == ErrorCode::kIo);
}

TEST_CASE("recorded buffers chain and continue seeds") {
  const MorphologySpec s = short_bastion(60);
  const TransitionBuffer buf = record_buffer(s, 150, {7});
  check_consistent(buf);
  CHECK(buf.size() == 150u);
  CHECK(buf.meta.seeds == std::vector<std::uint64_t>{7, 8, 9});
  CHECK(buf.meta.final_episode_cut);
  CHECK(buf.meta.obs_dim == 151);
  CHECK(buf.meta.act_dim == 12);
  CHECK(buf.meta.spec_hash == spec_hash(s));
  CHECK(parse_spec(buf.meta.spec_json) == s);
  CHECK(buf.obs.size() == 150u * 151u);
  const std::size_t od = 151;
  for (std::size_t i = 0; i + 1 < buf.size(); ++i) {
    if (buf.episode_id[i] != buf.episode_id[i + 1]) {
      CHECK((buf.terminated[i] || buf.truncated[i]));
      CHECK(buf.episode_id[i + 1] == buf.episode_id[i] + 1);
      continue;
    }
    CHECK(std::equal(&buf.next_obs[i * od], &buf.next_obs[(i + 1) * od], &buf.obs[(i + 1) * od]));
  }
  CHECK(record_buffer(s, 10).meta.seeds == std::vector<std::uint64_t>{0});
  CHECK(code_of([&] { record_buffer(s, 0); }) == ErrorCode::kInvalidInput);

  const TransitionBuffer exact = record_buffer(s, 120);
  CHECK_FALSE(exact.meta.final_episode_cut);
  CHECK(verify_buffer(exact).ok());
}

TEST_CASE("buffer files round trip") {
  const TransitionBuffer buf = record_buffer(builtin_morphology("leaper"), 90, {2, 1});
  const std::string path = tmp("leaper.gfb");
  write_buffer(buf, path);
  const TransitionBuffer back = read_buffer(path);
  CHECK(back == buf);
  CHECK(back.meta.act_dim == 12);
  CHECK(back.meta.obs_dim == 163);
  CHECK(read_buffer(path, builtin_morphology("leaper")) == buf);
  CHECK(code_of([&] { read_buffer(path, builtin_morphology("bastion")); }) ==
        ErrorCode::kSchemaMismatch);
  MorphologySpec tweaked = builtin_morphology("leaper");
  tweaked.v_star = 1.1;
  CHECK(code_of([&] { read_buffer(path, tweaked); }) == ErrorCode::kSchemaMismatch);

  const auto side = nlohmann::json::parse(slurp(path + ".json"));
  CHECK(side.at("morphology") == "leaper");
  CHECK(side.at("rows") == 90);
  CHECK(side.at("seeds") == nlohmann::json::array({2}));

  const std::string raw = slurp(path);
  CHECK(raw.compare(0, 8, "GAITFBUF") == 0);
  std::uint32_t version;
  std::memcpy(&version, raw.data() + 8, 4);
  CHECK(version == kBufferSchemaVersion);
}

TEST_CASE("damaged buffer files are rejected") {
  const TransitionBuffer buf = record_buffer(short_bastion(30), 40);
  const std::string path = tmp("damaged.gfb");
  write_buffer(buf, path);
  const std::string raw = slurp(path);

  const auto rewrite = [&](const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
  };
  rewrite(raw.substr(0, raw.size() - 100));
  try {
    read_buffer(path);
    FAIL("truncated file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchemaMismatch);
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  rewrite(raw.substr(0, 20));
  CHECK(code_of([&] { read_buffer(path); }) == ErrorCode::kSchemaMismatch);
  std::string magic = raw;
  magic[0] = 'X';
  rewrite(magic);
  CHECK(code_of([&] { read_buffer(path); }) == ErrorCode::kSchemaMismatch);
  std::string version = raw;
  version[8] = 9;
  rewrite(version);
  CHECK(code_of([&] { read_buffer(path); }) == ErrorCode::kSchemaMismatch);
  CHECK(code_of([&] { read_buffer(tmp("missing.gfb")); }) == ErrorCode::kIo);

  // Swap the embedded spec for another one of the same length.
  std::string forged = raw;
  const auto at = forged.find("\"v_star\":1.0");
  REQUIRE(at != std::string::npos);
  forged.replace(at, 12, "\"v_star\":1.5");
  rewrite(forged);
  CHECK(code_of([&] { read_buffer(path); }) == ErrorCode::kSchemaMismatch);
  CHECK(code_of([&] { write_buffer(buf, "/nonexistent/dir/b.gfb"); }) == ErrorCode::kIo);
}

TEST_CASE("verify detects tampering") {
  const TransitionBuffer buf = record_buffer(short_bastion(30), 70);
  const VerifyReport ok = verify_buffer(buf);
  CHECK(ok.ok());
  CHECK(ok.transitions == 70);
  CHECK(ok.episodes == 3);
  CHECK(ok.max_reward_error == 0.0);
  CHECK(ok.max_obs_error == 0.0);

  TransitionBuffer reward = buf;
  reward.reward[33] += 1e-6;
  const VerifyReport r = verify_buffer(reward);
  CHECK_FALSE(r.ok());
  CHECK(r.mismatches == 1);
  CHECK(r.problems.at(0).find("row 33") != std::string::npos);

  TransitionBuffer action = buf;
  action.action[12 * 10 + 3] += 0.5;
  CHECK_FALSE(verify_buffer(action).ok());

  TransitionBuffer flags = buf;
  flags.truncated[29] = 0;
  CHECK_FALSE(verify_buffer(flags).ok());

  TransitionBuffer spec = buf;
  spec.meta.spec_json = serialize_spec(builtin_morphology("bastion"), -1);
  CHECK(code_of([&] { verify_buffer(spec); }) == ErrorCode::kSchemaMismatch);

  TransitionBuffer ragged = buf;
  ragged.reward.pop_back();
  CHECK(code_of([&] { check_consistent(ragged); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("external policy over a spawned process") {
  const MorphologySpec s = short_bastion(40);
  {
    auto ext = ExternPolicy::spawn(server("zero"));
    ZeroPolicy zero;
    EvalReport a = evaluate(*ext, s, 2);
    EvalReport b = evaluate(zero, s, 2);
    CHECK(a.policy_name == "extern");
    b.policy_name = a.policy_name;
    CHECK(a == b);
  }
  {
    auto ext = make_policy("spawn:" + server("sine"));
    SinePolicy local;
    CHECK(evaluate(*ext, s, 3) == evaluate(local, s, 3));
  }
  for (const char* mode : {"bad-dim", "bad-version", "bad-type", "hangup"}) {
    CAPTURE(mode);
    auto ext = ExternPolicy::spawn(server(mode));
    CHECK(code_of([&] { evaluate(*ext, s, 1); }) == ErrorCode::kProtocol);
  }
  auto missing = ExternPolicy::spawn("exec /nonexistent/policy-binary 2>/dev/null");
  CHECK(code_of([&] { evaluate(*missing, s, 1); }) == ErrorCode::kProtocol);
}

TEST_CASE("external policy over a Unix socket") {
  const MorphologySpec s = short_bastion(30);
  const std::string sock = tmp("policy.sock");
  fs::remove(sock);
  const std::string cmd = server("sine") + " --socket " + sock + " &";
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::unique_ptr<Policy> ext;
  for (int i = 0; i < 200 && !ext; ++i) {
    try {
      ext = make_policy("unix:" + sock);
    } catch (const Error&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  REQUIRE(ext);
  SinePolicy local;
  CHECK(evaluate(*ext, s, 2) == evaluate(local, s, 2));
  CHECK(code_of([&] { make_policy("unix:" + tmp("no-such.sock")); }) == ErrorCode::kIo);
  CHECK(code_of([] { make_policy("carrier-pigeon"); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("replay dump") {
  const std::string path = tmp("replay.jsonl");
  CpgPolicy cpg;
  dump_replay(builtin_morphology("tick"), cpg, 4, 12, path);
  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 14u);
  CHECK(rows[0].at("morphology") == "tick");
  CHECK(rows[0].at("bodies").size() == 25u);
  CHECK(rows[1].at("step") == 0);
  CHECK(rows[13].at("step") == 12);
  CHECK(rows[5].at("pos").size() == 25u);
  CHECK(rows[5].at("quat")[0].size() == 4u);
  CHECK(rows[2].at("time").get<double>() == doctest::Approx(0.05));
}
