#pragma once

#include <string>
#include <vector>

#include "mrbt/bt.hpp"
#include "mrbt/formula.hpp"

namespace mrbt {

// One subtask of a task decomposition: completion condition psi, progress
// condition phi, and the action masks of the navigation and interaction
// behaviors serving it.
struct SubtaskSpec {
  std::string name;
  Formula psi;
  Formula phi;
  ActionMask nav_mask;
  ActionMask interact_mask;
  std::uint64_t schema_fp = 0;
};

struct RewardSettings {
  double condition_reward = 1.0;
  double condition_penalty = -1.0;
  double navigation_reward = 0.1;
  double navigation_penalty = -0.1;
  double task_bonus = 10.0;
};

struct StructureMetrics {
  int behaviors = 0;
  int rm_states = 0;
  int rm_edges = 0;
};

// Closed-form structure counts for a k-subtask template: the tree has
// 1 + 5k behavior nodes, and its reward machinery amounts to 6k states and
// 12k labeled edges (2 reachable states and 4 edges per leaf automaton).
StructureMetrics structure_metrics(int k);

// Monolithic hierarchical reward machine baseline for the running
// three-subtask example, used for side-by-side structure reporting.
inline constexpr int kHrmRefStates = 13;
inline constexpr int kHrmRefEdges = 24;

inline int psi_formula_id(int subtask) { return 2 * subtask; }
inline int phi_formula_id(int subtask) { return 2 * subtask + 1; }

// Builds the template tree: a root Sequence over one Fallback per subtask,
// Fallback(i) = [ condition MB(psi_i) | Sequence(navigation MB(phi_i),
// interaction MB(false)) ]. Condition leaves carry the full action set as
// mask. Leaf ids run (cond_0, nav_0, int_0, cond_1, ...) depth first.
Mrbt build_template(const std::vector<SubtaskSpec>& subtasks, const EnvSchema& schema,
                    const RewardSettings& rewards);

inline int condition_leaf_id(int subtask) { return 3 * subtask; }
inline int navigation_leaf_id(int subtask) { return 3 * subtask + 1; }
inline int interaction_leaf_id(int subtask) { return 3 * subtask + 2; }
inline int subtask_of_leaf(int leaf_id) { return leaf_id / 3; }

// Evaluates all 2k formulas against a state, producing sigma.
LabelAssignment label(const std::vector<SubtaskSpec>& subtasks, const PredicateView& state,
                      const TaskBindings& bindings);

}  // namespace mrbt
