#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

#include "gaitforge/gaitforge.h"

namespace {

struct Common {
  std::string morph;
  std::vector<std::string> sets;

  std::vector<const char*> overrides() const {
    std::vector<const char*> out;
    for (const auto& s : sets) out.push_back(s.c_str());
    return out;
  }
};

int fail(gf_status st) {
  std::fprintf(stderr, "error [%s]: %s\n", gf_status_name(st), gf_last_error());
  return static_cast<int>(st);
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--morph", c.morph, "queen, bastion, tick, leaper or a config file")->required();
  cmd->add_option("--set", c.sets, "override a config field, key=value (repeatable)");
}

void print_report(const gf_report* rep, const std::string& morph, const std::string& policy) {
  gf_report_summary s{};
  gf_report_summary_get(rep, &s);
  std::printf("morphology %s, policy %s, %zu episodes\n", morph.c_str(), policy.c_str(),
              s.n_episodes);
  for (std::size_t i = 0; i < s.n_episodes; ++i) {
    gf_episode_stats e{};
    gf_report_episode(rep, i, &e);
    std::printf("  seed %-6" PRIu64 " return %10.3f  length %4d  displacement %8.3f  "
                "compliance %.3f  tent %.3f  %s\n",
                e.seed, e.ret, e.length, e.displacement, e.compliance, e.tent_fraction,
                e.survived ? "survived" : "terminated");
  }
  std::printf("mean return %.6f  std %.6f  mean displacement %.4f\n", s.mean_return,
              s.std_return, s.mean_displacement);
  std::printf("gait compliance %.4f  survival %.4f  tent fraction %.4f\n", s.gait_compliance,
              s.survival_rate, s.tent_fraction);
}

int finish_report(gf_report* rep, const Common& c, const std::string& policy,
                  const std::string& out, bool per_seed, std::int64_t step) {
  print_report(rep, c.morph, policy);
  gf_status st = GF_OK;
  if (!out.empty()) {
    gf_report_set_step(rep, step);
    st = gf_report_write_csv(rep, out.c_str(), per_seed ? 1 : 0);
  }
  gf_report_destroy(rep);
  return st == GF_OK ? 0 : fail(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitforge: legged locomotion environments, CPG demonstrators and data tools"};
  app.require_subcommand(1);

  Common c;
  std::vector<std::uint64_t> seeds;
  int episodes = 0;
  std::string out;
  bool per_seed = false;
  std::int64_t step = 0;

  auto* run = app.add_subcommand("run-cpg", "roll out the CPG demonstrator and report returns");
  add_common(run, c);
  run->add_option("--episodes", episodes, "episode count (default 5, or the seed count)");
  run->add_option("--seeds", seeds, "comma-separated episode seeds")->delimiter(',');
  run->add_option("--out", out, "CSV report path");
  run->add_flag("--per-seed", per_seed, "add one CSV row per episode");
  run->add_option("--step", step, "value of the CSV step column");

  std::int64_t transitions = 100000;
  auto* rec = app.add_subcommand("record", "record a CPG transition buffer");
  add_common(rec, c);
  rec->add_option("--transitions", transitions, "transition count")->capture_default_str();
  rec->add_option("--seeds", seeds, "comma-separated episode seeds")->delimiter(',');
  rec->add_option("--out", out, "buffer path (.gfb); a .json sidecar is written next to it")
      ->required();

  std::string policy = "cpg";
  std::string extern_cmd;
  std::string extern_socket;
  auto* ev = app.add_subcommand("eval", "evaluate a policy with deterministic rollouts");
  add_common(ev, c);
  ev->add_option("--policy", policy, "cpg, zero or extern")
      ->check(CLI::IsMember({"cpg", "zero", "extern"}))
      ->capture_default_str();
  ev->add_option("--episodes", episodes, "episode count (default 10, or the seed count)");
  ev->add_option("--seeds", seeds, "comma-separated episode seeds")->delimiter(',');
  ev->add_option("--extern-cmd", extern_cmd, "policy server command (stdin/stdout protocol)");
  ev->add_option("--extern-socket", extern_socket, "policy server Unix socket path");
  ev->add_option("--out", out, "CSV report path");
  ev->add_flag("--per-seed", per_seed, "add one CSV row per episode");
  ev->add_option("--step", step, "value of the CSV step column");

  std::string file;
  double tol = 1e-9;
  auto* ver = app.add_subcommand("verify-buffer", "replay a buffer and check every transition");
  ver->add_option("file", file, "buffer path")->required();
  ver->add_option("--tol", tol, "reward/observation tolerance")->capture_default_str();

  std::uint64_t seed = 0;
  int max_steps = 0;
  auto* dump = app.add_subcommand("dump-replay", "write per-step body poses as JSON lines");
  add_common(dump, c);
  dump->add_option("--seed", seed, "episode seed")->capture_default_str();
  dump->add_option("--policy", policy, "cpg or zero")
      ->check(CLI::IsMember({"cpg", "zero"}))
      ->capture_default_str();
  dump->add_option("--steps", max_steps, "step limit (default: the horizon)");
  dump->add_option("--out", out, "replay path (.jsonl)")->required();

  auto* exp = app.add_subcommand("export-morph", "print or write a morphology config file");
  add_common(exp, c);
  exp->add_option("--out", out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);
  const auto ov = c.overrides();
  const char* const* ovp = ov.empty() ? nullptr : ov.data();
  const std::uint64_t* sp = seeds.empty() ? nullptr : seeds.data();

  if (*run) {
    if (episodes == 0 && seeds.empty()) episodes = 5;
    gf_report* rep = nullptr;
    const gf_status st = gf_run_cpg(c.morph.c_str(), ovp, ov.size(), episodes, sp, seeds.size(), &rep);
    if (st != GF_OK) return fail(st);
    return finish_report(rep, c, "cpg", out, per_seed, step);
  }
  if (*rec) {
    const gf_status st = gf_record_buffer(c.morph.c_str(), ovp, ov.size(), transitions, sp,
                                          seeds.size(), out.c_str());
    if (st != GF_OK) return fail(st);
    std::printf("wrote %" PRId64 " transitions to %s\n", transitions, out.c_str());
    return 0;
  }
  if (*ev) {
    if (episodes == 0 && seeds.empty()) episodes = 10;
    std::string source = policy;
    if (policy == "extern") {
      if (extern_cmd.empty() == extern_socket.empty()) {
        std::fprintf(stderr, "error: --policy extern needs exactly one of --extern-cmd or "
                             "--extern-socket\n");
        return 2;
      }
      source = extern_cmd.empty() ? "unix:" + extern_socket : "spawn:" + extern_cmd;
    }
    gf_report* rep = nullptr;
    const gf_status st = gf_evaluate(c.morph.c_str(), ovp, ov.size(), source.c_str(), episodes,
                                     sp, seeds.size(), &rep);
    if (st != GF_OK) return fail(st);
    return finish_report(rep, c, policy, out, per_seed, step);
  }
  if (*ver) {
    gf_verify_result r{};
    const gf_status st = gf_verify_buffer(file.c_str(), tol, &r);
    std::printf("%" PRId64 " transitions in %" PRId64 " episodes, max reward error %.3g, "
                "max obs error %.3g, %" PRId64 " mismatches\n",
                r.transitions, r.episodes, r.max_reward_error, r.max_obs_error, r.mismatches);
    if (st != GF_OK) return fail(st);
    std::printf("OK\n");
    return 0;
  }
  if (*dump) {
    const gf_status st = gf_dump_replay(c.morph.c_str(), ovp, ov.size(), policy.c_str(), seed,
                                        max_steps, out.c_str());
    if (st != GF_OK) return fail(st);
    std::printf("wrote %s\n", out.c_str());
    return 0;
  }
  if (*exp) {
    std::size_t len = 0;
    gf_morphology_export(c.morph.c_str(), ovp, ov.size(), nullptr, 0, &len);
    std::string text(len + 1, '\0');
    const gf_status st =
        gf_morphology_export(c.morph.c_str(), ovp, ov.size(), text.data(), text.size(), &len);
    if (st != GF_OK) return fail(st);
    text.resize(len);
    if (out.empty()) {
      std::printf("%s\n", text.c_str());
      return 0;
    }
    std::FILE* f = std::fopen(out.c_str(), "wb");
    if (f == nullptr) {
      std::fprintf(stderr, "error: cannot open %s\n", out.c_str());
      return static_cast<int>(GF_ERR_IO);
    }
    std::fprintf(f, "%s\n", text.c_str());
    std::fclose(f);
    return 0;
  }
  return 0;
}
