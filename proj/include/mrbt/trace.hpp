#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrbt/mrbt_template.hpp"
#include "mrbt/task_space.hpp"

namespace mrbt {

// A finite trajectory: states s_0..s_T, the actions between them, and the
// label assignment (satisfied formula ids) of every state.
struct Trace {
  Task task;
  std::vector<EnvState> states;
  std::vector<int> actions;               // size states.size() - 1
  std::vector<std::vector<int>> labels;   // size states.size()

  int length() const { return static_cast<int>(states.size()); }
};

// Fills `labels` by evaluating all subtask formulas on every state.
void annotate_labels(Trace& trace, const std::vector<SubtaskSpec>& subtasks,
                     const EnvSchema& schema);

// Human-readable per-step dump: predicate values, satisfied labels and the
// action taken. Used for counterexample files and debug prompts.
std::string trace_to_text(const Trace& trace, const EnvSchema& schema,
                          const std::vector<SubtaskSpec>& subtasks);

// Re-executes the recorded actions from s_0 under deterministic dynamics
// and checks that the stored states are reproduced exactly.
bool replay_matches(const Trace& trace);

// Engine debug log: one row per tick.
struct DebugTickRow {
  int t = 0;
  std::vector<int> ticked;
  double reward = 0.0;
  std::string mask_bits;
  Status root_status = Status::Running;
};
void write_debug_trace_csv(std::ostream& os, const std::vector<DebugTickRow>& rows);

// Episode log: one row per environment step.
struct EpisodeRow {
  int t = 0;
  int action = -1;
  double reward = 0.0;
  std::string mask_bits;
  bool done = false;
};
void write_episode_csv(std::ostream& os, const std::vector<EpisodeRow>& rows);

}  // namespace mrbt
