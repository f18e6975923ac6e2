#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrbt/expert.hpp"
#include "mrbt/pipeline.hpp"
#include "mrbt/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_fresh(const std::string& path, bool force) {
  if (!force && fs::exists(path)) {
    throw std::runtime_error("output already exists: " + path + " (pass --force to overwrite)");
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = mrbt::trim(tok);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw std::runtime_error("empty seed list: " + s);
  return seeds;
}

// 0 = all pass, 1 = counterexample, 2 = inconclusive only
int verdict_exit(const std::vector<mrbt::VerifyVerdict>& verdicts) {
  if (mrbt::all_passed(verdicts)) return 0;
  for (const auto& v : verdicts) {
    if (v.result == mrbt::VerifyResult::CounterexampleFound) return 1;
  }
  return 2;
}

struct LoadedSpec {
  mrbt::MrbtSpecFile file;
  mrbt::SpaceBundle bundle;
  std::vector<mrbt::SubtaskSpec> subtasks;
};

LoadedSpec load_spec(const std::string& path, int scale) {
  LoadedSpec ls;
  ls.file = mrbt::MrbtSpecFile::load(path);
  ls.bundle = mrbt::make_task_space(ls.file.space_name, scale);
  ls.subtasks = ls.file.parse_subtasks(ls.bundle.schema, ls.bundle.space.task_var_names());
  return ls;
}

void write_counterexamples(const std::vector<mrbt::VerifyVerdict>& verdicts,
                           const LoadedSpec& ls, const std::string& dir) {
  for (const auto& v : verdicts) {
    if (v.result != mrbt::VerifyResult::CounterexampleFound || !v.trace) continue;
    std::string kind = mrbt::spec_kind_name(v.spec);
    std::replace(kind.begin(), kind.end(), ' ', '_');
    std::string name =
        "cex_" + kind + (v.subtask >= 0 ? "_" + std::to_string(v.subtask) : "") + ".txt";
    write_text((fs::path(dir) / name).string(),
               v.description + "\n\n" +
                   mrbt::trace_to_text(*v.trace, ls.bundle.schema, ls.subtasks));
  }
}

int cmd_generate(const std::string& space, int scale, const std::string& out,
                 const std::string& mock, const std::string& prompt_dir, int iterations,
                 const mrbt::VerifyConfig& vcfg, bool force) {
  ensure_fresh(out, force);
  mrbt::SpaceBundle bundle = mrbt::make_task_space(space, scale);

  std::unique_ptr<mrbt::Generator> gen;
  if (!mock.empty()) {
    gen = std::make_unique<mrbt::ScriptedGenerator>(mrbt::ScriptedGenerator::from_file(mock));
  } else {
    gen = std::make_unique<mrbt::HttpChatGenerator>(mrbt::HttpChatGenerator::from_env());
  }

  mrbt::PromptLibrary lib = prompt_dir.empty() ? mrbt::PromptLibrary::defaults()
                                               : mrbt::PromptLibrary::from_dir(prompt_dir);
  mrbt::PipelineConfig cfg;
  cfg.max_iterations = iterations;
  cfg.verify = vcfg;

  mrbt::Stopwatch watch;
  mrbt::PipelineResult result = mrbt::run_pipeline(bundle, *gen, cfg, lib);

  result.spec.save(out);
  std::string table;
  if (!result.verdicts.empty()) {
    std::vector<mrbt::SubtaskSpec> subtasks =
        result.spec.parse_subtasks(bundle.schema, bundle.space.task_var_names());
    table = mrbt::format_verdict_table(result.verdicts, subtasks);
    write_text(out + ".verdicts.txt", table);
  }
  std::string transcript;
  for (const auto& m : result.transcript) {
    transcript += "[" + m.role + "]\n" + m.content + "\n\n";
  }
  write_text(out + ".transcript.txt", transcript);

  json manifest = {
      {"command", "generate"},
      {"space", space},
      {"scale", scale},
      {"generator", gen->id()},
      {"iterations", result.iterations},
      {"verified", result.verified},
      {"horizon", vcfg.horizon},
      {"n_distinct", vcfg.n_distinct},
      {"timeout_secs", vcfg.timeout_secs},
      {"wall_secs", watch.seconds()},
      {"outputs", {out, out + ".verdicts.txt", out + ".transcript.txt"}},
  };
  if (!result.verified) manifest["failure_reason"] = result.failure_reason;
  write_text(out + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << table;
  if (result.verified) {
    std::cout << "verified decomposition written to " << out << " after "
              << result.iterations << " iteration(s)\n";
    return 0;
  }
  std::cout << "generation did not verify: " << result.failure_reason << "\n";
  return result.verdicts.empty() ? 1 : verdict_exit(result.verdicts);
}

int cmd_verify(const std::string& spec_path, int scale, const std::string& out,
               const mrbt::VerifyConfig& vcfg, bool force) {
  LoadedSpec ls = load_spec(spec_path, scale);
  mrbt::SymbolicModel model(ls.bundle);
  std::vector<mrbt::VerifyVerdict> verdicts =
      mrbt::verify_subtasks(ls.subtasks, model, vcfg);
  std::string table = mrbt::format_verdict_table(verdicts, ls.subtasks);
  std::cout << table;

  if (!out.empty()) {
    fs::create_directories(out);
    std::string table_path = (fs::path(out) / "verdicts.txt").string();
    ensure_fresh(table_path, force);
    write_text(table_path, table);
    write_counterexamples(verdicts, ls, out);
    json manifest = {
        {"command", "verify"},   {"spec", spec_path},
        {"space", ls.file.space_name}, {"scale", scale},
        {"horizon", vcfg.horizon},     {"n_distinct", vcfg.n_distinct},
        {"timeout_secs", vcfg.timeout_secs},
        {"all_passed", mrbt::all_passed(verdicts)},
    };
    write_text((fs::path(out) / "manifest.json").string(), manifest.dump(2) + "\n");
  }

  int code = verdict_exit(verdicts);
  if (code == 0) {
    std::cout << "all specifications hold\n";
  } else if (code == 1) {
    for (const auto& v : verdicts) {
      if (v.result == mrbt::VerifyResult::CounterexampleFound) {
        std::cout << "counterexample: " << mrbt::spec_kind_name(v.spec);
        if (v.subtask >= 0) std::cout << " subtask " << v.subtask;
        std::cout << "\n";
        break;
      }
    }
  } else {
    std::cout << "inconclusive within the time budget\n";
  }
  return code;
}

int cmd_train(const std::string& spec_path, int scale, const std::string& mode_str,
              const std::string& algo, long steps, int window, const std::string& seeds,
              bool stochastic, int eval_episodes, int threads, const std::string& out_dir,
              bool force) {
  LoadedSpec ls = load_spec(spec_path, scale);
  mrbt::AblationMode mode = mrbt::mode_from_name(mode_str);

  mrbt::TrainConfig cfg;
  cfg.algorithm = algo == "pg" ? mrbt::Algorithm::PolicyGradient : mrbt::Algorithm::QLearning;
  cfg.total_steps = steps;
  cfg.window = window;
  cfg.seeds = parse_seed_list(seeds);
  cfg.dynamics.stochastic = stochastic;
  cfg.eval_episodes = eval_episodes;
  cfg.threads = threads;

  fs::create_directories(out_dir);
  std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  ensure_fresh(metrics_path, force);

  mrbt::Stopwatch watch;
  mrbt::TrainReport report = mrbt::train(ls.bundle, ls.subtasks, ls.file.rewards, mode, cfg);

  std::ofstream mf(metrics_path);
  mrbt::write_metrics_csv(mf, report);
  mf.close();

  json seeds_json = json::array();
  for (const auto& sr : report.seeds) {
    std::string policy_path =
        (fs::path(out_dir) / ("policy_seed_" + std::to_string(sr.seed) + ".txt")).string();
    sr.policy.save(policy_path);
    seeds_json.push_back({{"seed", sr.seed},
                          {"final_success", sr.final_success},
                          {"mask_violations", sr.mask_violations},
                          {"episodes", sr.episodes},
                          {"steps_to_0.8", sr.steps_to(0.8)}});
    std::cout << "seed " << sr.seed << ": final success " << sr.final_success
              << ", mask violations " << sr.mask_violations << ", episodes " << sr.episodes
              << "\n";
  }

  json manifest = {
      {"command", "train"},
      {"spec", spec_path},
      {"space", ls.file.space_name},
      {"scale", scale},
      {"mode", mrbt::mode_name(mode)},
      {"algorithm", cfg.algorithm == mrbt::Algorithm::QLearning ? "q" : "pg"},
      {"total_steps", cfg.total_steps},
      {"window", cfg.window},
      {"stochastic", stochastic},
      {"eval_episodes", eval_episodes},
      {"mean_final_success", report.mean_final_success()},
      {"wall_secs", watch.seconds()},
      {"seeds", seeds_json},
  };
  write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");

  std::cout << "mode " << mrbt::mode_name(mode) << ": mean final success "
            << report.mean_final_success() << " over " << report.seeds.size()
            << " seed(s); metrics in " << metrics_path << "\n";
  return 0;
}

int cmd_eval(const std::string& spec_path, int scale, const std::string& policy_path,
             const std::string& mode_str, int episodes, std::uint64_t seed, bool stochastic) {
  if (!fs::exists(policy_path)) {
    throw std::runtime_error("policy file not found: " + policy_path);
  }
  LoadedSpec ls = load_spec(spec_path, scale);
  mrbt::TrainedPolicy policy = mrbt::TrainedPolicy::load(policy_path);
  mrbt::DynamicsConfig dyn;
  dyn.stochastic = stochastic;
  double success = mrbt::evaluate(policy, ls.bundle, ls.subtasks, ls.file.rewards,
                                  mrbt::mode_from_name(mode_str), episodes, dyn, seed);
  std::cout << "success rate " << success << " over " << episodes << " episode(s)\n";
  return 0;
}

int cmd_metrics(const std::string& spec_path, int k) {
  if (!spec_path.empty()) {
    mrbt::MrbtSpecFile f = mrbt::MrbtSpecFile::load(spec_path);
    k = static_cast<int>(f.subtasks.size());
  }
  if (k < 1) throw std::runtime_error("pass --spec or --subtasks to choose the tree size");
  mrbt::StructureMetrics m = mrbt::structure_metrics(k);
  std::cout << "MRBT: " << m.behaviors << " behaviors, " << m.rm_states << " states, "
            << m.rm_edges << " edges; HRM(ref): " << mrbt::kHrmRefStates << " states, "
            << mrbt::kHrmRefEdges << " edges\n";
  return 0;
}

int cmd_demo_test(const std::string& spec_path, int scale, int n, std::uint64_t seed,
                  const std::string& style_str, int random_length) {
  LoadedSpec ls = load_spec(spec_path, scale);
  mrbt::ExpertStyle style = mrbt::ExpertStyle::Optimal;
  if (style_str == "scan") style = mrbt::ExpertStyle::ScanFirst;
  else if (style_str == "drop") style = mrbt::ExpertStyle::DropKey;
  else if (style_str != "optimal") throw std::runtime_error("unknown style: " + style_str);

  if (random_length <= 0) random_length = ls.bundle.space.max_steps;
  std::vector<mrbt::Trace> experts = mrbt::collect_expert_demos(ls.bundle, style, n, seed);
  std::vector<mrbt::Trace> randoms =
      mrbt::collect_random_demos(ls.bundle, n, random_length, seed + 1);

  mrbt::DemoTestReport report =
      mrbt::test_with_demonstrations(ls.subtasks, ls.bundle, experts, randoms, n);
  std::cout << mrbt::format_verdict_table(report.verdicts, ls.subtasks);
  for (size_t i = 0; i < ls.subtasks.size(); ++i) {
    std::vector<int> prior = report.subtask_prior(static_cast<int>(i));
    std::cout << "prior[" << i << " " << ls.subtasks[i].name << "]:";
    for (int a : prior) std::cout << ' ' << ls.bundle.schema.actions[a];
    std::cout << "\n";
  }
  return mrbt::all_passed(report.verdicts) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masking reward behavior trees: generate, verify, train"};
  app.require_subcommand(1);

  std::string space = "doorkey", spec_path, out, out_dir, mock, prompt_dir;
  std::string mode_str = "mrbt", algo = "q", seeds = "1,2,3,4", style = "optimal";
  std::string policy_path;
  int scale = 0, iterations = 5, window = 2048, eval_episodes = 200, threads = 0;
  int n_demos = 10, random_length = 0, k_subtasks = 0;
  long steps = 150000;
  std::uint64_t seed = 1;
  bool stochastic = false, force = false;
  mrbt::VerifyConfig vcfg;

  auto* gen = app.add_subcommand("generate", "produce and verify a decomposition");
  gen->add_option("--space", space, "task space: doorkey | lockedroom | dronesupplier");
  gen->add_option("--scale", scale, "grid size (0 = full size)");
  gen->add_option("--out", out, "spec file to write")->required();
  gen->add_option("--mock", mock, "scripted generator response file (otherwise MRBT_CHAT_URL)");
  gen->add_option("--prompts", prompt_dir, "prompt template override directory");
  gen->add_option("--iterations", iterations, "maximum generate+verify rounds");
  gen->add_option("--horizon", vcfg.horizon, "bounded trace length");
  gen->add_option("--n-distinct", vcfg.n_distinct, "witnesses required");
  gen->add_option("--timeout", vcfg.timeout_secs, "verifier timeout per check, seconds");
  gen->add_option("--threads", vcfg.threads, "verifier worker threads");
  gen->add_flag("--force", force, "overwrite existing outputs");

  auto* ver = app.add_subcommand("verify", "check a decomposition against all specifications");
  ver->add_option("--spec", spec_path, "spec file")->required();
  ver->add_option("--scale", scale, "grid size (0 = full size)");
  ver->add_option("--out", out, "directory for verdicts and counterexample files");
  ver->add_option("--horizon", vcfg.horizon, "bounded trace length");
  ver->add_option("--n-distinct", vcfg.n_distinct, "witnesses required");
  ver->add_option("--timeout", vcfg.timeout_secs, "verifier timeout per check, seconds");
  ver->add_option("--threads", vcfg.threads, "verifier worker threads");
  ver->add_flag("--force", force, "overwrite existing outputs");

  auto* tr = app.add_subcommand("train", "train a policy against a decomposition");
  tr->add_option("--spec", spec_path, "spec file")->required();
  tr->add_option("--scale", scale, "grid size (0 = full size)");
  tr->add_option("--mode", mode_str, "task | procedure | rbt | mrbt")->required();
  tr->add_option("--algorithm", algo, "q | pg");
  tr->add_option("--steps", steps, "total environment steps per seed");
  tr->add_option("--window", window, "metric window in steps");
  tr->add_option("--seeds", seeds, "comma-separated seed list");
  tr->add_flag("--stochastic", stochastic, "stochastic key-drop dynamics");
  tr->add_option("--eval-episodes", eval_episodes, "greedy evaluation episodes");
  tr->add_option("--threads", threads, "parallel seeds");
  tr->add_option("--out", out_dir, "output directory")->required();
  tr->add_flag("--force", force, "overwrite existing outputs");

  auto* ev = app.add_subcommand("eval", "evaluate a saved policy");
  ev->add_option("--spec", spec_path, "spec file")->required();
  ev->add_option("--scale", scale, "grid size (0 = full size)");
  ev->add_option("--policy", policy_path, "policy file")->required();
  ev->add_option("--mode", mode_str, "task | procedure | rbt | mrbt");
  ev->add_option("--episodes", eval_episodes, "evaluation episodes");
  ev->add_option("--seed", seed, "evaluation seed");
  ev->add_flag("--stochastic", stochastic, "stochastic key-drop dynamics");

  auto* met = app.add_subcommand("metrics", "print structure metrics for a decomposition");
  met->add_option("--spec", spec_path, "spec file (k = its subtask count)");
  met->add_option("--subtasks", k_subtasks, "subtask count k, if no spec file");

  auto* dt = app.add_subcommand("demo-test", "test a decomposition against demonstrations");
  dt->add_option("--spec", spec_path, "spec file")->required();
  dt->add_option("--scale", scale, "grid size (0 = full size)");
  dt->add_option("--n", n_demos, "demonstrations of each kind");
  dt->add_option("--seed", seed, "demo sampling seed");
  dt->add_option("--style", style, "expert style: optimal | scan | drop");
  dt->add_option("--random-length", random_length, "random walk length (0 = step budget)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_generate(space, scale, out, mock, prompt_dir, iterations, vcfg, force);
    }
    if (ver->parsed()) return cmd_verify(spec_path, scale, out, vcfg, force);
    if (tr->parsed()) {
      return cmd_train(spec_path, scale, mode_str, algo, steps, window, seeds, stochastic,
                       eval_episodes, threads, out_dir, force);
    }
    if (ev->parsed()) {
      return cmd_eval(spec_path, scale, policy_path, mode_str, eval_episodes, seed, stochastic);
    }
    if (met->parsed()) return cmd_metrics(spec_path, k_subtasks);
    if (dt->parsed()) {
      return cmd_demo_test(spec_path, scale, n_demos, seed, style, random_length);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
