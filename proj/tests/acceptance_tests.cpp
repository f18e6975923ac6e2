// Acceptance gate: one line of output per criterion, nonzero exit when any
// criterion fails. Heavier criteria (training) run with the same budgets
// the command line tool uses.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrbt/expert.hpp"
#include "mrbt/pipeline.hpp"
#include "mrbt/trainer.hpp"
#include "support/reference_bt.hpp"

using namespace mrbt;

namespace {

std::string asset(const std::string& name) {
  return std::string(MRBT_SOURCE_DIR) + "/assets/" + name;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome ok(std::string detail) { return {true, std::move(detail)}; }
Outcome bad(std::string detail) { return {false, std::move(detail)}; }

std::vector<SubtaskSpec> load_subtasks(const std::string& file, const SpaceBundle& bundle,
                                       RewardSettings* rewards = nullptr) {
  MrbtSpecFile spec = MrbtSpecFile::load(asset(file));
  if (rewards) *rewards = spec.rewards;
  return spec.parse_subtasks(bundle.schema, bundle.space.task_var_names());
}

std::vector<SubtaskSpec> doorkey_subtasks(int scale, SpaceBundle* out_bundle = nullptr,
                                          RewardSettings* rewards = nullptr) {
  SpaceBundle bundle = make_task_space("doorkey", scale);
  auto subtasks = load_subtasks("doorkey.mrbt", bundle, rewards);
  if (out_bundle) *out_bundle = bundle;
  return subtasks;
}

Formula parse_against(const SpaceBundle& bundle, const std::string& text) {
  return parse_formula(text, bundle.schema, bundle.space.task_var_names());
}

// Results of the training criteria, shared with the mask-compliance check.
std::optional<long> g_mrbt_mask_violations;

Outcome criterion_structure_metrics() {
  StructureMetrics m3 = structure_metrics(3);
  StructureMetrics m4 = structure_metrics(4);
  if (m3.behaviors != 16 || m3.rm_states != 18 || m3.rm_edges != 36)
    return bad("k=3 gave (" + std::to_string(m3.behaviors) + ", " + std::to_string(m3.rm_states) +
               ", " + std::to_string(m3.rm_edges) + "), expected (16, 18, 36)");
  if (m4.behaviors != 21 || m4.rm_states != 24 || m4.rm_edges != 48)
    return bad("k=4 gave (" + std::to_string(m4.behaviors) + ", " + std::to_string(m4.rm_states) +
               ", " + std::to_string(m4.rm_edges) + "), expected (21, 24, 48)");
  return ok("k=3 -> (16 behaviors, 18 states, 36 edges), k=4 -> (21, 24, 48)");
}

Outcome criterion_template_construction() {
  SpaceBundle bundle = make_task_space("doorkey", 6);
  RewardSettings rewards;
  for (int k = 1; k <= 5; ++k) {
    std::vector<SubtaskSpec> sts;
    for (int i = 0; i < k; ++i) {
      SubtaskSpec st;
      st.name = "st" + std::to_string(i);
      st.psi = parse_against(bundle, "goal_pos == -1");
      st.phi = parse_against(bundle, "manhattan(agent_pos, goal_pos) <= 1");
      st.nav_mask = ActionMask::from_names(bundle.schema, {"left", "right", "forward"});
      st.interact_mask = ActionMask::from_names(bundle.schema, {"left", "right", "pickup"});
      sts.push_back(std::move(st));
    }
    Mrbt tree = build_template(sts, bundle.schema, rewards);
    if (tree.node_count() != 1 + 5 * k)
      return bad("k=" + std::to_string(k) + ": " + std::to_string(tree.node_count()) +
                 " nodes, expected " + std::to_string(1 + 5 * k));
    if (tree.leaf_count() != 3 * k || tree.num_formulas() != 2 * k)
      return bad("k=" + std::to_string(k) + ": wrong leaf or formula count");
    for (int i = 0; i < k; ++i) {
      const Mbrm& cond = tree.leaf(condition_leaf_id(i));
      const Mbrm& nav = tree.leaf(navigation_leaf_id(i));
      const Mbrm& inter = tree.leaf(interaction_leaf_id(i));
      if (cond.kind != MbrmKind::Condition || cond.rho != psi_formula_id(i) ||
          !(cond.mask == ActionMask::full(bundle.schema)))
        return bad("k=" + std::to_string(k) + ": condition leaf " + std::to_string(i) +
                   " malformed");
      if (nav.kind != MbrmKind::Navigation || nav.rho != phi_formula_id(i) ||
          !(nav.mask == sts[i].nav_mask))
        return bad("k=" + std::to_string(k) + ": navigation leaf " + std::to_string(i) +
                   " malformed");
      if (inter.kind != MbrmKind::Interaction || inter.rho.has_value() ||
          !(inter.mask == sts[i].interact_mask))
        return bad("k=" + std::to_string(k) + ": interaction leaf " + std::to_string(i) +
                   " malformed");
    }
  }
  return ok("k in 1..5: 1+5k nodes, 3k leaves in (psi, phi, interaction) order, 2k formulas");
}

Outcome criterion_tick_oracle() {
  SpaceBundle bundle = make_task_space("doorkey", 6);
  const int k = 2;
  std::vector<SubtaskSpec> sts;
  std::vector<std::string> pool = {"left", "right", "forward", "pickup", "drop", "toggle"};
  for (int i = 0; i < k; ++i) {
    SubtaskSpec st;
    st.name = "st" + std::to_string(i);
    st.psi = parse_against(bundle, "goal_pos == -1");
    st.phi = parse_against(bundle, "manhattan(agent_pos, goal_pos) <= 1");
    st.nav_mask = ActionMask::from_names(bundle.schema, {pool[2 * i], pool[2 * i + 1]});
    st.interact_mask = ActionMask::from_names(bundle.schema, {pool[2 * i + 2]});
    sts.push_back(std::move(st));
  }
  RewardSettings rewards;
  Mrbt tree = build_template(sts, bundle.schema, rewards);
  std::vector<ActionMask> leaf_masks;
  for (int id = 0; id < tree.leaf_count(); ++id) leaf_masks.push_back(tree.leaf(id).mask);
  mrbt_test::ReferenceTemplateBt ref(k, leaf_masks, rewards);

  // enumerate every reachable leaf-state assignment and every sigma
  const Status cond_states[] = {Status::Failure, Status::Success};
  const Status nav_states[] = {Status::Running, Status::Success};
  long combos = 0;
  for (int a0 = 0; a0 < 4; ++a0) {
    for (int a1 = 0; a1 < 4; ++a1) {
      std::vector<Status> assign = {cond_states[a0 & 1], nav_states[(a0 >> 1) & 1],
                                    Status::Running, cond_states[a1 & 1],
                                    nav_states[(a1 >> 1) & 1], Status::Running};
      for (std::uint32_t bits = 0; bits < 16; ++bits) {
        LabelAssignment sigma;
        for (int f = 0; f < 4; ++f) {
          if ((bits >> f) & 1u) sigma.add(f);
        }
        tree.set_assignment(assign);
        ref.state() = assign;
        TickResult engine = tree.tick(sigma);
        mrbt_test::ReferenceTick naive = ref.tick(sigma);
        if (engine.ticked != naive.ticked || engine.root_status != naive.root ||
            !(engine.mask == naive.mask) ||
            std::abs(engine.reward - naive.reward) > 1e-12)
          return bad("divergence at assignment " + std::to_string(a0) + "/" +
                     std::to_string(a1) + ", sigma bits " + std::to_string(bits));
        if (tree.assignment() != ref.state()) return bad("post-tick states diverged");
        ++combos;
      }
    }
  }
  if (combos != 256) return bad("enumerated " + std::to_string(combos) + " combos, expected 256");
  return ok("engine matches the naive reference on all 256 (state, sigma) combinations");
}

Outcome criterion_backtracking() {
  SpaceBundle bundle = make_task_space("lockedroom", 9);
  RewardSettings rewards;
  auto sts = load_subtasks("lockedroom.mrbt", bundle, &rewards);
  Mrbt tree = build_template(sts, bundle.schema, rewards);

  auto [s, task] = bundle.generator->init_at(0);
  DynamicsConfig dyn;
  auto drive = [&](int action) {
    s = step_env(s, action, dyn);
    GridView view(s, bundle.schema);
    return tree.tick(label(sts, view, task.bindings));
  };
  {
    GridView view(s, bundle.schema);
    tree.tick(label(sts, view, task.bindings));  // initial tick, reward discarded
  }

  for (int a : {kActForward, kActForward, kActRight}) drive(a);
  TickResult opened = drive(kActToggle);
  if (std::abs(opened.reward - 1.0) > 1e-9) return bad("door-open tick reward off");
  for (int a : {kActForward, kActForward}) drive(a);
  TickResult picked = drive(kActPickup);
  if (std::abs(picked.reward - 1.0) > 1e-9) return bad("key-pickup tick reward off");

  TickResult dropped = drive(kActDrop);
  if (std::abs(dropped.reward - (-1.0)) > 1e-9)
    return bad("drop tick reward was " + std::to_string(dropped.reward) + ", expected -1");
  if (!(dropped.mask == sts[1].interact_mask))
    return bad("drop tick mask did not revert to the key subtask");
  drive(kActLeft);
  drive(kActLeft);
  TickResult away = drive(kActForward);
  if (!(away.mask == sts[1].nav_mask))
    return bad("mask after retreating was not the key subtask's navigation mask");
  return ok("drop tick pays the -1 penalty and the mask reverts to the key subtask");
}

Outcome criterion_verifier_soundness() {
  SpaceBundle bundle;
  auto honest = doorkey_subtasks(6, &bundle);
  SymbolicModel model(bundle);
  VerifyConfig cfg;
  cfg.horizon = 10;

  int reproduced = 0;
  auto expect_cex = [&](const VerifyVerdict& v, const std::vector<SubtaskSpec>& sts,
                        const std::string& what) -> std::optional<std::string> {
    if (v.result != VerifyResult::CounterexampleFound)
      return what + ": no counterexample was found";
    if (!violation_reproduced(v, sts, bundle.schema, cfg))
      return what + ": counterexample did not replay";
    ++reproduced;
    return std::nullopt;
  };

  {
    // the occlusion-blind door formula from the refinement anecdote
    auto sts = honest;
    sts[1].psi = parse_against(bundle, "door_state[yellow] == OPEN");
    auto v = check_composition_persistence(sts, model, cfg);
    if (auto err = expect_cex(v, sts, "occlusion-blind psi")) return bad(*err);
    if (v.first_violating_subtask != 1)
      return bad("persistence blamed subtask " + std::to_string(v.first_violating_subtask));
  }
  {
    auto sts = honest;
    sts[0].psi = parse_against(bundle, "true");
    auto v = check_completion_non_triviality(sts[0].psi, 0, model, cfg);
    if (auto err = expect_cex(v, sts, "trivially true psi")) return bad(*err);
  }
  {
    auto sts = honest;
    sts[2].psi = parse_against(bundle, "false");
    auto v = check_completion_correctness(sts[2].psi, 2, model, cfg);
    if (auto err = expect_cex(v, sts, "unsatisfiable psi")) return bad(*err);
  }
  {
    auto sts = honest;
    sts[2].phi = parse_against(bundle, "false");
    auto v = check_proximity_correctness(sts[2].psi, sts[2].phi, 2, model, cfg);
    if (auto err = expect_cex(v, sts, "unsatisfiable phi")) return bad(*err);
  }
  return ok(std::to_string(reproduced) +
            " seeded bugs each produced a counterexample that replayed violation-exactly");
}

Outcome criterion_desk_scale_verification() {
  SpaceBundle bundle;
  auto honest = doorkey_subtasks(6, &bundle);
  SymbolicModel model(bundle);
  VerifyConfig cfg;
  cfg.horizon = 10;

  auto verdicts = verify_subtasks(honest, model, cfg);
  if (verdicts.size() != 13) return bad("expected 13 verdicts, got " + std::to_string(verdicts.size()));
  if (!all_passed(verdicts)) return bad("the shipped decomposition did not pass all specs");

  auto flipped = [&](VerifyResult r) { return r == VerifyResult::CounterexampleFound; };
  auto top_psi = parse_against(bundle, "true");
  if (!flipped(check_completion_non_triviality(top_psi, 0, model, cfg).result))
    return bad("a trivially true psi did not fail completion non-triviality");
  auto top_phi = parse_against(bundle, "true");
  if (!flipped(check_proximity_non_triviality(top_phi, 0, model, cfg).result))
    return bad("a trivially true phi did not fail proximity non-triviality");
  auto bot_psi = parse_against(bundle, "false");
  if (!flipped(check_completion_correctness(bot_psi, 2, model, cfg).result))
    return bad("an unsatisfiable psi did not fail completion correctness");
  auto bot_phi = parse_against(bundle, "false");
  if (!flipped(check_proximity_correctness(honest[1].psi, bot_phi, 1, model, cfg).result))
    return bad("an unsatisfiable phi did not fail proximity correctness");
  return ok("all 13 verdicts pass at H=10; injected top/bottom formulas flip the expected specs");
}

Outcome criterion_refinement_loop() {
  SpaceBundle bundle = make_task_space("lockedroom", 9);
  ScriptedGenerator gen = ScriptedGenerator::from_file(asset("mock_lockedroom.txt"));
  PipelineConfig cfg;
  PipelineResult result = run_pipeline(bundle, gen, cfg);
  if (!result.verified) return bad("pipeline did not verify: " + result.failure_reason);
  if (result.iterations != 2)
    return bad("pipeline took " + std::to_string(result.iterations) + " iterations, expected 2");
  if (gen.remaining() != 0) return bad("scripted responses were left unread");
  return ok("scripted refinement converges in exactly 2 iterations");
}

Outcome criterion_training_directional() {
  SpaceBundle bundle;
  RewardSettings rewards;
  auto sts = doorkey_subtasks(8, &bundle, &rewards);
  TrainConfig cfg;

  TrainReport mrbt = train(bundle, sts, rewards, AblationMode::Mrbt, cfg);
  TrainReport rbt = train(bundle, sts, rewards, AblationMode::Rbt, cfg);
  TrainReport task = train(bundle, sts, rewards, AblationMode::Task, cfg);

  long violations = 0;
  for (const auto& seed : mrbt.seeds) violations += seed.mask_violations;
  g_mrbt_mask_violations = violations;

  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(3);
  detail << "mean final success mrbt=" << mrbt.mean_final_success()
         << " rbt=" << rbt.mean_final_success() << " task=" << task.mean_final_success();

  if (mrbt.mean_final_success() < 0.9) return bad(detail.str() + "; mrbt below 0.9");
  if (rbt.mean_final_success() < 0.7) return bad(detail.str() + "; rbt below 0.7");
  if (task.mean_final_success() > 0.1) return bad(detail.str() + "; task above 0.1");

  int ordered = 0;
  for (size_t i = 0; i < mrbt.seeds.size(); ++i) {
    long m = mrbt.seeds[i].steps_to(0.8);
    long r = rbt.seeds[i].steps_to(0.8);
    if (m >= 0 && (r < 0 || m <= r)) ++ordered;
  }
  detail << "; mrbt reached 0.8 first on " << ordered << "/" << mrbt.seeds.size() << " seeds";
  if (ordered < 3) return bad(detail.str());
  return ok(detail.str());
}

Outcome criterion_stochastic_robustness() {
  SpaceBundle bundle = make_task_space("lockedroom", 9);
  RewardSettings rewards;
  auto sts = load_subtasks("lockedroom.mrbt", bundle, &rewards);
  TrainConfig cfg;
  cfg.dynamics.stochastic = true;

  TrainReport mrbt = train(bundle, sts, rewards, AblationMode::Mrbt, cfg);
  TrainReport proc = train(bundle, sts, rewards, AblationMode::Procedure, cfg);

  long violations = g_mrbt_mask_violations.value_or(0);
  for (const auto& seed : mrbt.seeds) violations += seed.mask_violations;
  g_mrbt_mask_violations = violations;

  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(3);
  detail << "stochastic mean final success mrbt=" << mrbt.mean_final_success()
         << " procedure=" << proc.mean_final_success();

  for (const auto& seed : proc.seeds) {
    if (!seed.procedure_rewards_ok)
      return bad(detail.str() + "; procedure paid a negative cumulative subtask reward");
  }
  if (!(mrbt.mean_final_success() > proc.mean_final_success()))
    return bad(detail.str() + "; ordering violated");
  int ordered = 0;
  for (size_t i = 0; i < mrbt.seeds.size(); ++i) {
    if (mrbt.seeds[i].final_success > proc.seeds[i].final_success) ++ordered;
  }
  detail << "; per-seed ordering " << ordered << "/" << mrbt.seeds.size();
  if (ordered < 3) return bad(detail.str());
  return ok(detail.str());
}

Outcome criterion_mask_compliance() {
  if (!g_mrbt_mask_violations)
    return bad("training criteria did not run, so compliance could not be measured");
  if (*g_mrbt_mask_violations != 0)
    return bad(std::to_string(*g_mrbt_mask_violations) +
               " executed actions fell outside the active mask");
  return ok("zero executed actions outside the active mask across all masked training runs");
}

Outcome criterion_demo_testing() {
  SpaceBundle bundle;
  auto sts = doorkey_subtasks(8, &bundle);
  auto experts = collect_expert_demos(bundle, ExpertStyle::DropKey, 10, 1);
  auto randoms = collect_random_demos(bundle, 10, bundle.space.max_steps, 2);
  DemoTestReport report = test_with_demonstrations(sts, bundle, experts, randoms, 10);

  const VerifyVerdict* persistence = nullptr;
  for (const auto& v : report.verdicts) {
    if (v.spec == SpecKind::CompositionPersistence) persistence = &v;
  }
  if (!persistence) return bad("no persistence verdict in the report");
  if (persistence->result != VerifyResult::CounterexampleFound)
    return bad("the key-dropping expert did not trip the persistence check");
  if (persistence->demos_violating != 10)
    return bad("persistence failed on " + std::to_string(persistence->demos_violating) +
               "/10 demos, expected all 10");

  auto prior = report.subtask_prior(1);
  for (int a : {kActLeft, kActRight, kActForward}) {
    bool found = false;
    for (int p : prior) found = found || p == a;
    if (!found)
      return bad("mined prior for the door subtask misses " + std::string(grid_action_name(a)));
  }
  return ok("persistence fails on 10/10 key-dropping demos; the door subtask prior keeps {left, right, forward}");
}

Outcome criterion_slip_calibration() {
  ParsedMap pm = parse_map("#####\n#...#\n#.>.#\n#...#\n#####");
  auto layout = std::make_shared<Layout>(pm.layout);
  EnvState s;
  s.layout = layout;
  s.agent_pos = pm.agent;
  s.agent_dir = pm.agent_dir;
  KeyState key;
  key.color = color_index("yellow");
  key.where = KeyWhere::Carried;
  s.keys = {key};

  DynamicsConfig dyn;
  dyn.stochastic = true;
  RngStream rng = RngStream::seeded(17, 0x51ee);
  const int trials = 10000;
  int drops = 0;
  for (int i = 0; i < trials; ++i) {
    EnvState next = step_env(s, kActDone, dyn, &rng);
    if (next.keys[0].where == KeyWhere::OnGrid) ++drops;
  }
  double rate = static_cast<double>(drops) / trials;
  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(4);
  detail << "empirical drop rate " << rate << " over " << trials << " carry-steps";
  if (std::abs(rate - 0.05) > 0.01) return bad(detail.str() + "; outside 0.05 +/- 0.01");
  return ok(detail.str());
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"structure metrics", criterion_structure_metrics},
      {"template construction", criterion_template_construction},
      {"tick semantics oracle", criterion_tick_oracle},
      {"reactive backtracking", criterion_backtracking},
      {"verifier soundness", criterion_verifier_soundness},
      {"desk-scale verification", criterion_desk_scale_verification},
      {"refinement loop", criterion_refinement_loop},
      {"training directional", criterion_training_directional},
      {"stochastic robustness", criterion_stochastic_robustness},
      {"mask compliance", criterion_mask_compliance},
      {"demonstration testing", criterion_demo_testing},
      {"slip calibration", criterion_slip_calibration},
  };

  int failures = 0;
  for (int i = 0; i < 12; ++i) {
    Outcome out;
    try {
      out = entries[i].fn();
    } catch (const std::exception& e) {
      out = bad(std::string("exception: ") + e.what());
    }
    if (!out.pass) ++failures;
    std::cout << "ACCEPTANCE " << (i + 1) << ": " << (out.pass ? "PASS" : "FAIL") << " ["
              << entries[i].label << "] " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
