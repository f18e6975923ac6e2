#include "mrbt/mrbt_template.hpp"

#include <stdexcept>

namespace mrbt {

StructureMetrics structure_metrics(int k) {
  if (k < 1) throw std::invalid_argument("template needs at least one subtask");
  return StructureMetrics{1 + 5 * k, 6 * k, 12 * k};
}

Mrbt build_template(const std::vector<SubtaskSpec>& subtasks, const EnvSchema& schema,
                    const RewardSettings& rewards) {
  if (subtasks.empty()) throw std::invalid_argument("template needs at least one subtask");
  std::uint64_t fp = schema.fingerprint();
  std::vector<BtNodeSpec> branches;
  for (size_t i = 0; i < subtasks.size(); ++i) {
    const SubtaskSpec& st = subtasks[i];
    if (st.schema_fp != 0 && st.schema_fp != fp)
      throw std::invalid_argument("subtask '" + st.name + "' was built for a different schema");
    if (!st.psi.valid() || !st.phi.valid())
      throw std::invalid_argument("subtask '" + st.name + "' has an invalid formula");
    if (st.nav_mask.empty() || st.interact_mask.empty())
      throw std::invalid_argument("subtask '" + st.name + "' has an empty action mask");
    int si = static_cast<int>(i);
    Mbrm cond = make_condition_mbrm(psi_formula_id(si), rewards.condition_reward,
                                    rewards.condition_penalty, ActionMask::full(schema),
                                    st.name + "/condition");
    Mbrm nav = make_navigation_mbrm(phi_formula_id(si), rewards.navigation_reward,
                                    rewards.navigation_penalty, st.nav_mask,
                                    st.name + "/navigation");
    Mbrm act = make_interaction_mbrm(st.interact_mask, st.name + "/interaction");
    branches.push_back(BtNodeSpec::fallback(
        {BtNodeSpec::leaf(cond),
         BtNodeSpec::sequence({BtNodeSpec::leaf(nav), BtNodeSpec::leaf(act)})}));
  }
  return Mrbt(BtNodeSpec::sequence(std::move(branches)),
              2 * static_cast<int>(subtasks.size()));
}

LabelAssignment label(const std::vector<SubtaskSpec>& subtasks, const PredicateView& state,
                      const TaskBindings& bindings) {
  LabelAssignment sigma;
  for (size_t i = 0; i < subtasks.size(); ++i) {
    int si = static_cast<int>(i);
    if (eval_formula(subtasks[i].psi, state, bindings)) sigma.add(psi_formula_id(si));
    if (eval_formula(subtasks[i].phi, state, bindings)) sigma.add(phi_formula_id(si));
  }
  return sigma;
}

}  // namespace mrbt
