#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrbt/trace.hpp"

namespace mrbt {

enum class SpecKind {
  CompletionCorrectness,
  CompletionNonTriviality,
  ObjectProximityCorrectness,
  ObjectProximityNonTriviality,
  CompositionPersistence,
};

std::string spec_kind_name(SpecKind k);

struct VerifyConfig {
  int horizon = 25;        // bounded trace length H
  int n_distinct = 3;      // witnesses required from distinct initial states
  double timeout_secs = 900.0;
  int threads = 0;         // 0 = hardware concurrency
};

enum class VerifyResult { Holds, WitnessesFound, CounterexampleFound, Inconclusive };

std::string verify_result_name(VerifyResult r);

struct VerifyVerdict {
  SpecKind spec = SpecKind::CompletionCorrectness;
  int subtask = -1;  // -1 when the property ranges over all subtasks
  VerifyResult result = VerifyResult::Inconclusive;
  std::optional<Trace> trace;    // counterexample, when one exists
  std::vector<Trace> witnesses;  // for existential properties
  int first_violating_subtask = -1;
  int violation_step = -1;
  int demos_violating = 0;  // demonstration checks only
  double wall_time_secs = 0.0;
  std::string description;

  bool passed() const {
    return result == VerifyResult::Holds || result == VerifyResult::WitnessesFound;
  }
};

// Explicit-state model of one task space at a fixed scale: enumerable
// initial conditions plus the deterministic transition function. Exact by
// construction, since the generator's init family is the verification
// domain and successors come from the concrete dynamics.
class SymbolicModel {
 public:
  explicit SymbolicModel(SpaceBundle bundle) : bundle_(std::move(bundle)) {}

  const EnvSchema& schema() const { return bundle_.schema; }
  const SpaceBundle& bundle() const { return bundle_; }
  long init_count() const { return bundle_.generator->init_count(); }
  std::pair<EnvState, Task> init_at(long i) const { return bundle_.generator->init_at(i); }
  EnvState successor(const EnvState& s, int action) const {
    DynamicsConfig dyn;
    return step_env(s, action, dyn);
  }
  bool is_transition(const EnvState& s, int action, const EnvState& t) const {
    return successor(s, action) == t;
  }
  int num_actions() const { return bundle_.schema.num_actions(); }
  bool goal(const Task& task, const EnvState& s) const {
    return task_complete(task, s, bundle_.schema);
  }

 private:
  SpaceBundle bundle_;
};

// Individual checks. Formulas are evaluated under each initial condition's
// task bindings. All traces returned are padded to the horizon with the
// no-op action where the dynamics allow it.
VerifyVerdict check_completion_correctness(const Formula& psi, int subtask,
                                           const SymbolicModel& model, const VerifyConfig& cfg);
VerifyVerdict check_completion_non_triviality(const Formula& psi, int subtask,
                                              const SymbolicModel& model,
                                              const VerifyConfig& cfg);
VerifyVerdict check_proximity_correctness(const Formula& psi, const Formula& phi, int subtask,
                                          const SymbolicModel& model, const VerifyConfig& cfg);
VerifyVerdict check_proximity_non_triviality(const Formula& phi, int subtask,
                                             const SymbolicModel& model,
                                             const VerifyConfig& cfg);
VerifyVerdict check_composition_persistence(const std::vector<SubtaskSpec>& subtasks,
                                            const SymbolicModel& model, const VerifyConfig& cfg);

// Runs every applicable check for the decomposition: per subtask the four
// formula checks, plus one persistence check over the composition.
std::vector<VerifyVerdict> verify_subtasks(const std::vector<SubtaskSpec>& subtasks,
                                           const SymbolicModel& model, const VerifyConfig& cfg);

bool all_passed(const std::vector<VerifyVerdict>& verdicts);
bool any_inconclusive(const std::vector<VerifyVerdict>& verdicts);

// Independently re-derives the violation a counterexample trace claims:
// replays its actions through the concrete environment and checks the
// defining condition of the spec on the replayed states.
bool violation_reproduced(const VerifyVerdict& verdict, const std::vector<SubtaskSpec>& subtasks,
                          const EnvSchema& schema, const VerifyConfig& cfg);

// Renders verdicts as a table (specs x subtasks) with wall times.
std::string format_verdict_table(const std::vector<VerifyVerdict>& verdicts,
                                 const std::vector<SubtaskSpec>& subtasks);

// Demonstration-based testing: universal specs checked on expert demos,
// existential ones on random demos. Also mines per-leaf action priors from
// the expert demonstrations (actions taken while a leaf is last-ticked and
// Running). Throws if fewer than n demos of either kind are supplied.
struct DemoTestReport {
  std::vector<VerifyVerdict> verdicts;
  std::vector<std::vector<int>> leaf_priors;  // leaf id -> sorted action ids

  std::vector<int> subtask_prior(int subtask) const;  // union over its nav/interaction leaves
};

DemoTestReport test_with_demonstrations(const std::vector<SubtaskSpec>& subtasks,
                                        const SpaceBundle& bundle,
                                        const std::vector<Trace>& expert_demos,
                                        const std::vector<Trace>& random_demos, int n);

}  // namespace mrbt
