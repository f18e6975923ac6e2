#include "mrbt/verifier.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <future>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace mrbt {

std::string spec_kind_name(SpecKind k) {
  switch (k) {
    case SpecKind::CompletionCorrectness: return "completion correctness";
    case SpecKind::CompletionNonTriviality: return "completion non-triviality";
    case SpecKind::ObjectProximityCorrectness: return "object proximity correctness";
    case SpecKind::ObjectProximityNonTriviality: return "object proximity non-triviality";
    case SpecKind::CompositionPersistence: return "composition persistence";
  }
  return "?";
}

std::string verify_result_name(VerifyResult r) {
  switch (r) {
    case VerifyResult::Holds: return "holds";
    case VerifyResult::WitnessesFound: return "witnesses";
    case VerifyResult::CounterexampleFound: return "counterexample";
    case VerifyResult::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct SearchNode {
  EnvState s;
  std::uint32_t aux = 0;
  int parent = -1;
  int action = -1;
  int depth = 0;
};

// Exact visited set: hash buckets resolved by full state equality.
class VisitedSet {
 public:
  bool insert(const std::vector<SearchNode>& arena, int idx) {
    const SearchNode& n = arena[idx];
    std::uint64_t h = hash_mix(n.s.hash(), n.aux);
    auto& bucket = buckets_[h];
    for (int i : bucket) {
      if (arena[i].aux == n.aux && arena[i].s == n.s) return false;
    }
    bucket.push_back(idx);
    return true;
  }

 private:
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

bool holds(const Formula& f, const EnvState& s, const EnvSchema& schema, const TaskBindings& b) {
  GridView view(s, schema);
  return eval_formula(f, view, b);
}

Trace path_trace(const std::vector<SearchNode>& arena, int leaf_idx, const Task& task) {
  Trace t;
  t.task = task;
  std::vector<int> chain;
  for (int i = leaf_idx; i >= 0; i = arena[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  for (size_t i = 0; i < chain.size(); ++i) {
    t.states.push_back(arena[chain[i]].s);
    if (i > 0) t.actions.push_back(arena[chain[i]].action);
  }
  return t;
}

// Extends a trace to exactly `horizon` states with the no-op action.
void pad_trace(Trace& t, int horizon) {
  DynamicsConfig dyn;
  while (t.length() < horizon) {
    EnvState next = step_env(t.states.back(), kActDone, dyn);
    t.actions.push_back(kActDone);
    t.states.push_back(std::move(next));
  }
}

Trace idle_trace(const EnvState& s0, const Task& task, int horizon) {
  Trace t;
  t.task = task;
  t.states.push_back(s0);
  pad_trace(t, horizon);
  return t;
}

struct TimeoutError {};

class TimeBudget {
 public:
  explicit TimeBudget(double secs) : deadline_(secs) {}
  void tick() {
    if (++count_ % 1024 == 0 && deadline_.expired()) throw TimeoutError{};
  }

 private:
  Deadline deadline_;
  std::uint64_t count_ = 0;
};

VerifyVerdict timeout_verdict(SpecKind kind, int subtask, const VerifyConfig& cfg, double secs) {
  VerifyVerdict v;
  v.spec = kind;
  v.subtask = subtask;
  v.result = VerifyResult::Inconclusive;
  std::ostringstream os;
  os << "search exceeded the time budget of " << cfg.timeout_secs << " s";
  v.description = os.str();
  v.wall_time_secs = secs;
  return v;
}

}  // namespace

VerifyVerdict check_completion_correctness(const Formula& psi, int subtask,
                                           const SymbolicModel& model, const VerifyConfig& cfg) {
  Stopwatch sw;
  TimeBudget budget(cfg.timeout_secs);
  const EnvSchema& schema = model.schema();
  VerifyVerdict v;
  v.spec = SpecKind::CompletionCorrectness;
  v.subtask = subtask;

  try {
    long inits = model.init_count();
    for (long ii = 0; ii < inits; ++ii) {
      auto [s0, task] = model.init_at(ii);
      std::vector<SearchNode> arena;
      VisitedSet seen;
      std::deque<int> queue;
      arena.push_back({s0, holds(psi, s0, schema, task.bindings) ? 1u : 0u, -1, -1, 0});
      seen.insert(arena, 0);
      queue.push_back(0);
      while (!queue.empty()) {
        budget.tick();
        int cur = queue.front();
        queue.pop_front();
        if (arena[cur].aux == 0 && model.goal(task, arena[cur].s)) {
          Trace t = path_trace(arena, cur, task);
          pad_trace(t, cfg.horizon);
          v.result = VerifyResult::CounterexampleFound;
          v.violation_step = static_cast<int>(t.states.size()) - 1;
          v.trace = std::move(t);
          std::ostringstream os;
          os << "a trace reaches the goal while the completion formula never held "
             << "(goal reached at step " << arena[cur].depth << ")";
          v.description = os.str();
          v.wall_time_secs = sw.seconds();
          return v;
        }
        if (arena[cur].depth >= cfg.horizon - 1) continue;
        for (int a = 0; a < model.num_actions(); ++a) {
          EnvState next = model.successor(arena[cur].s, a);
          std::uint32_t aux =
              arena[cur].aux | (holds(psi, next, schema, task.bindings) ? 1u : 0u);
          int idx = static_cast<int>(arena.size());
          arena.push_back({std::move(next), aux, cur, a, arena[cur].depth + 1});
          if (seen.insert(arena, idx)) {
            queue.push_back(idx);
          } else {
            arena.pop_back();
          }
        }
      }
    }
    v.result = VerifyResult::Holds;
    v.description = "every bounded goal-reaching trace satisfies the completion formula";
  } catch (const TimeoutError&) {
    return timeout_verdict(v.spec, subtask, cfg, sw.seconds());
  }
  v.wall_time_secs = sw.seconds();
  return v;
}

namespace {

VerifyVerdict non_triviality_check(SpecKind kind, const Formula& f, int subtask,
                                   const SymbolicModel& model, const VerifyConfig& cfg) {
  Stopwatch sw;
  TimeBudget budget(cfg.timeout_secs);
  const EnvSchema& schema = model.schema();
  VerifyVerdict v;
  v.spec = kind;
  v.subtask = subtask;

  try {
    long inits = model.init_count();
    std::vector<EnvState> distinct_seen;
    for (long ii = 0; ii < inits && static_cast<int>(v.witnesses.size()) < cfg.n_distinct;
         ++ii) {
      budget.tick();
      auto [s0, task] = model.init_at(ii);
      bool dup = false;
      for (const EnvState& p : distinct_seen) {
        if (p == s0) {
          dup = true;
          break;
        }
      }
      if (dup) continue;
      distinct_seen.push_back(s0);
      if (!holds(f, s0, schema, task.bindings)) {
        // the state is frozen by no-ops, so the formula stays false for
        // the whole horizon
        v.witnesses.push_back(idle_trace(s0, task, cfg.horizon));
      }
    }
    if (static_cast<int>(v.witnesses.size()) >= cfg.n_distinct) {
      v.result = VerifyResult::WitnessesFound;
      std::ostringstream os;
      os << cfg.n_distinct << " traces from distinct initial states never satisfy the formula";
      v.description = os.str();
    } else {
      v.result = VerifyResult::CounterexampleFound;
      auto [s0, task] = model.init_at(0);
      v.trace = idle_trace(s0, task, cfg.horizon);
      v.violation_step = 0;
      std::ostringstream os;
      os << "formula already holds at step 0 in too many initial states: only "
         << v.witnesses.size() << " of the required " << cfg.n_distinct
         << " distinct witnesses exist";
      v.description = os.str();
      v.witnesses.clear();
    }
  } catch (const TimeoutError&) {
    return timeout_verdict(kind, subtask, cfg, sw.seconds());
  }
  v.wall_time_secs = sw.seconds();
  return v;
}

}  // namespace

VerifyVerdict check_completion_non_triviality(const Formula& psi, int subtask,
                                              const SymbolicModel& model,
                                              const VerifyConfig& cfg) {
  return non_triviality_check(SpecKind::CompletionNonTriviality, psi, subtask, model, cfg);
}

VerifyVerdict check_proximity_non_triviality(const Formula& phi, int subtask,
                                             const SymbolicModel& model,
                                             const VerifyConfig& cfg) {
  return non_triviality_check(SpecKind::ObjectProximityNonTriviality, phi, subtask, model, cfg);
}

VerifyVerdict check_proximity_correctness(const Formula& psi, const Formula& phi, int subtask,
                                          const SymbolicModel& model, const VerifyConfig& cfg) {
  Stopwatch sw;
  TimeBudget budget(cfg.timeout_secs);
  const EnvSchema& schema = model.schema();
  VerifyVerdict v;
  v.spec = SpecKind::ObjectProximityCorrectness;
  v.subtask = subtask;

  try {
    long inits = model.init_count();
    for (long ii = 0; ii < inits; ++ii) {
      auto [s0, task] = model.init_at(ii);
      if (cfg.horizon < 2) break;
      std::vector<SearchNode> arena;
      VisitedSet seen;
      std::deque<int> queue;
      arena.push_back({s0, 0, -1, -1, 0});
      seen.insert(arena, 0);
      queue.push_back(0);
      while (!queue.empty()) {
        budget.tick();
        int cur = queue.front();
        queue.pop_front();
        bool before_ok =
            !holds(psi, arena[cur].s, schema, task.bindings) &&
            !holds(phi, arena[cur].s, schema, task.bindings);
        for (int a = 0; a < model.num_actions(); ++a) {
          EnvState next = model.successor(arena[cur].s, a);
          if (before_ok && holds(psi, next, schema, task.bindings)) {
            // completion became true one step after a state where neither
            // psi nor phi held
            int t = arena[cur].depth;
            Trace tr = path_trace(arena, cur, task);
            tr.actions.push_back(a);
            tr.states.push_back(next);
            pad_trace(tr, cfg.horizon);
            v.result = VerifyResult::CounterexampleFound;
            v.violation_step = t;
            v.trace = std::move(tr);
            std::ostringstream os;
            os << "completion flips false to true at step " << t + 1
               << " but the progress formula did not hold at step " << t;
            v.description = os.str();
            v.wall_time_secs = sw.seconds();
            return v;
          }
          if (arena[cur].depth < cfg.horizon - 2) {
            int idx = static_cast<int>(arena.size());
            arena.push_back({std::move(next), 0, cur, a, arena[cur].depth + 1});
            if (seen.insert(arena, idx)) {
              queue.push_back(idx);
            } else {
              arena.pop_back();
            }
          }
        }
      }
    }
    v.result = VerifyResult::Holds;
    v.description = "the progress formula covers every completion flip";
  } catch (const TimeoutError&) {
    return timeout_verdict(v.spec, subtask, cfg, sw.seconds());
  }
  v.wall_time_secs = sw.seconds();
  return v;
}

namespace {

std::uint32_t psi_bits(const std::vector<SubtaskSpec>& subtasks, const EnvState& s,
                       const EnvSchema& schema, const TaskBindings& b) {
  std::uint32_t bits = 0;
  for (size_t i = 0; i < subtasks.size(); ++i) {
    if (holds(subtasks[i].psi, s, schema, b)) bits |= 1u << i;
  }
  return bits;
}

// Finds the first cumulative-obligation regression along a trace; returns
// (step, subtask) or (-1, -1).
std::pair<int, int> first_regression(const std::vector<SubtaskSpec>& subtasks, const Trace& tr,
                                     const EnvSchema& schema) {
  std::uint32_t obligated = 0;
  for (size_t t = 0; t < tr.states.size(); ++t) {
    std::uint32_t bits = psi_bits(subtasks, tr.states[t], schema, tr.task.bindings);
    std::uint32_t lost = obligated & ~bits;
    if (lost) {
      for (size_t i = 0; i < subtasks.size(); ++i) {
        if (lost & (1u << i)) return {static_cast<int>(t), static_cast<int>(i)};
      }
    }
    obligated |= bits;
  }
  return {-1, -1};
}

}  // namespace

VerifyVerdict check_composition_persistence(const std::vector<SubtaskSpec>& subtasks,
                                            const SymbolicModel& model, const VerifyConfig& cfg) {
  Stopwatch sw;
  TimeBudget budget(cfg.timeout_secs);
  const EnvSchema& schema = model.schema();
  VerifyVerdict v;
  v.spec = SpecKind::CompositionPersistence;
  v.subtask = -1;

  try {
    long inits = model.init_count();
    std::vector<EnvState> distinct_seen;

    for (long ii = 0; ii < inits && static_cast<int>(v.witnesses.size()) < cfg.n_distinct;
         ++ii) {
      auto [s0, task] = model.init_at(ii);
      bool dup = false;
      for (const EnvState& p : distinct_seen) {
        if (p == s0) {
          dup = true;
          break;
        }
      }
      if (dup) continue;
      distinct_seen.push_back(s0);

      // search restricted to traces that never lose an achieved completion
      std::vector<SearchNode> arena;
      VisitedSet seen;
      std::deque<int> queue;
      arena.push_back({s0, psi_bits(subtasks, s0, schema, task.bindings), -1, -1, 0});
      seen.insert(arena, 0);
      queue.push_back(0);
      bool found = false;
      while (!queue.empty() && !found) {
        budget.tick();
        int cur = queue.front();
        queue.pop_front();
        if (model.goal(task, arena[cur].s)) {
          Trace t = path_trace(arena, cur, task);
          pad_trace(t, cfg.horizon);
          v.witnesses.push_back(std::move(t));
          found = true;
          break;
        }
        if (arena[cur].depth >= cfg.horizon - 1) continue;
        for (int a = 0; a < model.num_actions(); ++a) {
          EnvState next = model.successor(arena[cur].s, a);
          std::uint32_t bits = psi_bits(subtasks, next, schema, task.bindings);
          if ((arena[cur].aux & ~bits) != 0) continue;  // a completion regressed
          std::uint32_t aux = arena[cur].aux | bits;
          int idx = static_cast<int>(arena.size());
          arena.push_back({std::move(next), aux, cur, a, arena[cur].depth + 1});
          if (seen.insert(arena, idx)) {
            queue.push_back(idx);
          } else {
            arena.pop_back();
          }
        }
      }
    }

    if (static_cast<int>(v.witnesses.size()) >= cfg.n_distinct) {
      v.result = VerifyResult::WitnessesFound;
      std::ostringstream os;
      os << cfg.n_distinct
         << " goal-reaching traces from distinct initial states keep every completed subtask "
            "completed";
      v.description = os.str();
      v.wall_time_secs = sw.seconds();
      return v;
    }

    // Diagnosis: find a goal-reaching trace and report the first subtask
    // whose achieved completion is lost along it.
    v.result = VerifyResult::CounterexampleFound;
    int witnesses_found = static_cast<int>(v.witnesses.size());
    v.witnesses.clear();
    for (long ii = 0; ii < inits; ++ii) {
      auto [s0, task] = model.init_at(ii);
      std::vector<SearchNode> arena;
      VisitedSet seen;
      std::deque<int> queue;
      arena.push_back({s0, 0, -1, -1, 0});
      seen.insert(arena, 0);
      queue.push_back(0);
      while (!queue.empty()) {
        budget.tick();
        int cur = queue.front();
        queue.pop_front();
        if (model.goal(task, arena[cur].s)) {
          Trace t = path_trace(arena, cur, task);
          pad_trace(t, cfg.horizon);
          auto [step, st] = first_regression(subtasks, t, schema);
          if (step >= 0) {
            v.first_violating_subtask = st;
            v.violation_step = step;
            v.trace = std::move(t);
            std::ostringstream os;
            os << "no " << cfg.n_distinct
               << "-witness set exists; along a goal-reaching trace, subtask " << st << " ('"
               << subtasks[st].name << "') is completed and then lost at step " << step;
            v.description = os.str();
            v.wall_time_secs = sw.seconds();
            return v;
          }
          break;  // goal reachable without regression from this init; try next
        }
        if (arena[cur].depth >= cfg.horizon - 1) continue;
        for (int a = 0; a < model.num_actions(); ++a) {
          EnvState next = model.successor(arena[cur].s, a);
          int idx = static_cast<int>(arena.size());
          arena.push_back({std::move(next), 0, cur, a, arena[cur].depth + 1});
          if (seen.insert(arena, idx)) {
            queue.push_back(idx);
          } else {
            arena.pop_back();
          }
        }
      }
    }
    auto [s0, task] = model.init_at(0);
    v.trace = idle_trace(s0, task, cfg.horizon);
    v.violation_step = -1;
    std::ostringstream os;
    os << "only " << witnesses_found << " of " << cfg.n_distinct
       << " required persistent goal-reaching traces exist within the horizon";
    v.description = os.str();
  } catch (const TimeoutError&) {
    return timeout_verdict(v.spec, -1, cfg, sw.seconds());
  }
  v.wall_time_secs = sw.seconds();
  return v;
}

std::vector<VerifyVerdict> verify_subtasks(const std::vector<SubtaskSpec>& subtasks,
                                           const SymbolicModel& model, const VerifyConfig& cfg) {
  std::vector<std::function<VerifyVerdict()>> jobs;
  for (size_t i = 0; i < subtasks.size(); ++i) {
    const SubtaskSpec& st = subtasks[i];
    int si = static_cast<int>(i);
    jobs.push_back([&st, si, &model, &cfg] {
      return check_completion_correctness(st.psi, si, model, cfg);
    });
    jobs.push_back([&st, si, &model, &cfg] {
      return check_completion_non_triviality(st.psi, si, model, cfg);
    });
    jobs.push_back([&st, si, &model, &cfg] {
      return check_proximity_correctness(st.psi, st.phi, si, model, cfg);
    });
    jobs.push_back([&st, si, &model, &cfg] {
      return check_proximity_non_triviality(st.phi, si, model, cfg);
    });
  }
  jobs.push_back([&subtasks, &model, &cfg] {
    return check_composition_persistence(subtasks, model, cfg);
  });

  int workers = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  std::vector<VerifyVerdict> out(jobs.size());
  size_t next = 0;
  while (next < jobs.size()) {
    size_t batch = std::min(jobs.size() - next, static_cast<size_t>(workers));
    std::vector<std::future<VerifyVerdict>> futs;
    for (size_t j = 0; j < batch; ++j) {
      futs.push_back(std::async(std::launch::async, jobs[next + j]));
    }
    for (size_t j = 0; j < batch; ++j) out[next + j] = futs[j].get();
    next += batch;
  }

  for (VerifyVerdict& v : out) {
    if (v.trace) annotate_labels(*v.trace, subtasks, model.schema());
    for (Trace& w : v.witnesses) annotate_labels(w, subtasks, model.schema());
  }
  return out;
}

bool all_passed(const std::vector<VerifyVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (!v.passed()) return false;
  }
  return !verdicts.empty();
}

bool any_inconclusive(const std::vector<VerifyVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (v.result == VerifyResult::Inconclusive) return true;
  }
  return false;
}

bool violation_reproduced(const VerifyVerdict& verdict, const std::vector<SubtaskSpec>& subtasks,
                          const EnvSchema& schema, const VerifyConfig& cfg) {
  if (!verdict.trace) return false;
  const Trace& tr = *verdict.trace;
  if (!replay_matches(tr)) return false;
  if (tr.length() != cfg.horizon) return false;
  const TaskBindings& b = tr.task.bindings;

  switch (verdict.spec) {
    case SpecKind::CompletionCorrectness: {
      if (verdict.subtask < 0) return false;
      const Formula& psi = subtasks[verdict.subtask].psi;
      for (const EnvState& s : tr.states) {
        if (holds(psi, s, schema, b)) return false;
      }
      GridView view(tr.states.back(), schema);
      for (const Formula& g : tr.task.goals) {
        if (!eval_formula(g, view, b)) return false;
      }
      return true;
    }
    case SpecKind::ObjectProximityCorrectness: {
      if (verdict.subtask < 0) return false;
      const Formula& psi = subtasks[verdict.subtask].psi;
      const Formula& phi = subtasks[verdict.subtask].phi;
      for (size_t t = 0; t + 1 < tr.states.size(); ++t) {
        if (!holds(psi, tr.states[t], schema, b) && holds(psi, tr.states[t + 1], schema, b) &&
            !holds(phi, tr.states[t], schema, b)) {
          return true;
        }
      }
      return false;
    }
    case SpecKind::CompletionNonTriviality:
    case SpecKind::ObjectProximityNonTriviality: {
      if (verdict.subtask < 0) return false;
      const Formula& f = verdict.spec == SpecKind::CompletionNonTriviality
                             ? subtasks[verdict.subtask].psi
                             : subtasks[verdict.subtask].phi;
      return holds(f, tr.states.front(), schema, b);
    }
    case SpecKind::CompositionPersistence: {
      auto [step, st] = first_regression(subtasks, tr, schema);
      return step >= 0 && st == verdict.first_violating_subtask;
    }
  }
  return false;
}

std::string format_verdict_table(const std::vector<VerifyVerdict>& verdicts,
                                 const std::vector<SubtaskSpec>& subtasks) {
  auto cell = [](const VerifyVerdict& v) {
    std::ostringstream os;
    os << verify_result_name(v.result) << " (" << static_cast<int>(v.wall_time_secs * 1000.0)
       << " ms)";
    return os.str();
  };

  std::vector<SpecKind> per_subtask = {
      SpecKind::CompletionCorrectness,
      SpecKind::CompletionNonTriviality,
      SpecKind::ObjectProximityCorrectness,
      SpecKind::ObjectProximityNonTriviality,
  };

  size_t wide = 0;
  for (const auto& k : per_subtask) wide = std::max(wide, spec_kind_name(k).size());
  wide = std::max(wide, spec_kind_name(SpecKind::CompositionPersistence).size());

  std::ostringstream os;
  for (SpecKind k : per_subtask) {
    os << spec_kind_name(k);
    os << std::string(wide - spec_kind_name(k).size(), ' ');
    for (size_t i = 0; i < subtasks.size(); ++i) {
      const VerifyVerdict* found = nullptr;
      for (const auto& v : verdicts) {
        if (v.spec == k && v.subtask == static_cast<int>(i)) found = &v;
      }
      os << "  [" << subtasks[i].name << ": " << (found ? cell(*found) : "missing") << "]";
    }
    os << "\n";
  }
  for (const auto& v : verdicts) {
    if (v.spec == SpecKind::CompositionPersistence) {
      os << spec_kind_name(v.spec)
         << std::string(wide - spec_kind_name(v.spec).size(), ' ') << "  [all: " << cell(v)
         << "]\n";
    }
  }
  for (const auto& v : verdicts) {
    if (!v.passed()) {
      os << "  " << spec_kind_name(v.spec);
      if (v.subtask >= 0) os << " / " << subtasks[v.subtask].name;
      os << ": " << v.description << "\n";
    }
  }
  return os.str();
}

DemoTestReport test_with_demonstrations(const std::vector<SubtaskSpec>& subtasks,
                                        const SpaceBundle& bundle,
                                        const std::vector<Trace>& expert_demos,
                                        const std::vector<Trace>& random_demos, int n) {
  if (static_cast<int>(expert_demos.size()) < n)
    throw std::invalid_argument("fewer expert demonstrations than requested n");
  if (static_cast<int>(random_demos.size()) < n)
    throw std::invalid_argument("fewer random demonstrations than requested n");

  const EnvSchema& schema = bundle.schema;
  DemoTestReport report;

  auto make = [&](SpecKind kind, int subtask) {
    VerifyVerdict v;
    v.spec = kind;
    v.subtask = subtask;
    return v;
  };

  for (size_t i = 0; i < subtasks.size(); ++i) {
    int si = static_cast<int>(i);
    const Formula& psi = subtasks[i].psi;
    const Formula& phi = subtasks[i].phi;

    VerifyVerdict cc = make(SpecKind::CompletionCorrectness, si);
    VerifyVerdict pc = make(SpecKind::ObjectProximityCorrectness, si);
    for (int d = 0; d < n; ++d) {
      const Trace& tr = expert_demos[d];
      const TaskBindings& b = tr.task.bindings;
      bool ever = false;
      for (const EnvState& s : tr.states) ever = ever || holds(psi, s, schema, b);
      if (!ever) {
        ++cc.demos_violating;
        if (!cc.trace) cc.trace = tr;
      }
      for (size_t t = 0; t + 1 < tr.states.size(); ++t) {
        if (!holds(psi, tr.states[t], schema, b) && holds(psi, tr.states[t + 1], schema, b) &&
            !holds(phi, tr.states[t], schema, b)) {
          ++pc.demos_violating;
          if (!pc.trace) {
            pc.trace = tr;
            pc.violation_step = static_cast<int>(t);
          }
          break;
        }
      }
    }
    cc.result = cc.demos_violating == 0 ? VerifyResult::Holds : VerifyResult::CounterexampleFound;
    cc.description = cc.demos_violating == 0
                         ? "completion observed on every demonstration"
                         : std::to_string(cc.demos_violating) + " of " + std::to_string(n) +
                               " demonstrations never satisfy the completion formula";
    pc.result = pc.demos_violating == 0 ? VerifyResult::Holds : VerifyResult::CounterexampleFound;
    pc.description = pc.demos_violating == 0
                         ? "every completion flip was preceded by progress"
                         : std::to_string(pc.demos_violating) + " of " + std::to_string(n) +
                               " demonstrations flip completion without progress";
    report.verdicts.push_back(std::move(cc));
    report.verdicts.push_back(std::move(pc));

    VerifyVerdict cn = make(SpecKind::CompletionNonTriviality, si);
    VerifyVerdict pn = make(SpecKind::ObjectProximityNonTriviality, si);
    int psi_never = 0;
    int phi_never = 0;
    for (int d = 0; d < n; ++d) {
      const Trace& tr = random_demos[d];
      const TaskBindings& b = tr.task.bindings;
      bool psi_ever = false;
      bool phi_ever = false;
      for (const EnvState& s : tr.states) {
        psi_ever = psi_ever || holds(psi, s, schema, b);
        phi_ever = phi_ever || holds(phi, s, schema, b);
      }
      if (!psi_ever) ++psi_never;
      if (!phi_ever) ++phi_never;
    }
    // Mirrors the model checker's N-distinct-witness requirement: the
    // formula is non-trivial when enough random walks never satisfy it.
    int needed = VerifyConfig().n_distinct;
    cn.result = psi_never >= needed ? VerifyResult::WitnessesFound
                                    : VerifyResult::CounterexampleFound;
    cn.demos_violating = n - psi_never;
    cn.description = std::to_string(psi_never) + " of " + std::to_string(n) +
                     " random demonstrations never satisfy the completion formula (" +
                     std::to_string(needed) + " required)";
    pn.result = phi_never >= needed ? VerifyResult::WitnessesFound
                                    : VerifyResult::CounterexampleFound;
    pn.demos_violating = n - phi_never;
    pn.description = std::to_string(phi_never) + " of " + std::to_string(n) +
                     " random demonstrations never satisfy the progress formula (" +
                     std::to_string(needed) + " required)";
    report.verdicts.push_back(std::move(cn));
    report.verdicts.push_back(std::move(pn));
  }

  VerifyVerdict pers = make(SpecKind::CompositionPersistence, -1);
  for (int d = 0; d < n; ++d) {
    const Trace& tr = expert_demos[d];
    auto [step, st] = first_regression(subtasks, tr, schema);
    if (step >= 0) {
      ++pers.demos_violating;
      if (!pers.trace) {
        pers.trace = tr;
        pers.violation_step = step;
        pers.first_violating_subtask = st;
      }
    }
  }
  pers.result =
      pers.demos_violating == 0 ? VerifyResult::Holds : VerifyResult::CounterexampleFound;
  pers.description = pers.demos_violating == 0
                         ? "no demonstration loses an achieved completion"
                         : std::to_string(pers.demos_violating) + " of " + std::to_string(n) +
                               " demonstrations lose an achieved completion";
  report.verdicts.push_back(std::move(pers));

  // Mask priors: record the executed action against the leaf that was
  // last ticked and still Running at that step.
  RewardSettings rewards;
  Mrbt tree = build_template(subtasks, schema, rewards);
  std::vector<std::set<int>> priors(tree.leaf_count());
  for (int d = 0; d < n; ++d) {
    const Trace& tr = expert_demos[d];
    tree.reset();
    for (size_t t = 0; t + 1 < tr.states.size(); ++t) {
      GridView view(tr.states[t], schema);
      LabelAssignment sigma = label(subtasks, view, tr.task.bindings);
      TickResult res = tree.tick(sigma);
      int last = res.ticked.back();
      if (tree.leaf_state(last) == Status::Running) priors[last].insert(tr.actions[t]);
    }
  }
  for (const auto& s : priors) report.leaf_priors.emplace_back(s.begin(), s.end());

  return report;
}

std::vector<int> DemoTestReport::subtask_prior(int subtask) const {
  std::set<int> out;
  for (int leaf : {navigation_leaf_id(subtask), interaction_leaf_id(subtask)}) {
    if (leaf < static_cast<int>(leaf_priors.size())) {
      out.insert(leaf_priors[leaf].begin(), leaf_priors[leaf].end());
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace mrbt
