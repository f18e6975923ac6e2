#include "mrbt/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mrbt {

std::string mode_name(AblationMode m) {
  switch (m) {
    case AblationMode::Task: return "task";
    case AblationMode::Procedure: return "procedure";
    case AblationMode::Rbt: return "rbt";
    case AblationMode::Mrbt: return "mrbt";
  }
  return "?";
}

AblationMode mode_from_name(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "task") return AblationMode::Task;
  if (n == "procedure") return AblationMode::Procedure;
  if (n == "rbt") return AblationMode::Rbt;
  if (n == "mrbt") return AblationMode::Mrbt;
  throw std::invalid_argument("unknown mode: " + name);
}

std::uint64_t state_task_key(const EnvState& s, const Task& task) {
  return hash_mix(s.hash(), task.hash());
}

const std::array<double, kNumGridActions>* TrainedPolicy::row(std::uint64_t key) const {
  auto it = table.find(key);
  return it == table.end() ? nullptr : &it->second;
}

int TrainedPolicy::act_greedy(std::uint64_t key, const ActionMask* mask) const {
  const auto* r = row(key);
  int best = -1;
  double best_v = 0.0;
  for (int a = 0; a < num_actions; ++a) {
    if (mask && !mask->test(a)) continue;
    double v = r ? (*r)[a] : 0.0;
    if (best < 0 || v > best_v) {
      best = a;
      best_v = v;
    }
  }
  if (best < 0) best = 0;  // empty mask cannot occur for valid trees
  return best;
}

int TrainedPolicy::act_sample(std::uint64_t key, const ActionMask* mask, RngStream& rng) const {
  const auto* r = row(key);
  std::array<double, kNumGridActions> p{};
  double maxv = -1e300;
  for (int a = 0; a < num_actions; ++a) {
    if (mask && !mask->test(a)) continue;
    double v = r ? (*r)[a] : 0.0;
    maxv = std::max(maxv, v);
  }
  double z = 0.0;
  for (int a = 0; a < num_actions; ++a) {
    if (mask && !mask->test(a)) {
      p[a] = 0.0;
      continue;
    }
    p[a] = std::exp((r ? (*r)[a] : 0.0) - maxv);
    z += p[a];
  }
  double u = rng.uniform() * z;
  double acc = 0.0;
  for (int a = 0; a < num_actions; ++a) {
    acc += p[a];
    if (u < acc && p[a] > 0.0) return a;
  }
  for (int a = num_actions - 1; a >= 0; --a) {
    if (p[a] > 0.0) return a;
  }
  return 0;
}

void TrainedPolicy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out << "algorithm " << (algorithm == Algorithm::QLearning ? "q" : "pg") << "\n";
  for (const auto& [key, row] : table) {
    out << key;
    for (double v : row) out << ' ' << v;
    out << "\n";
  }
}

TrainedPolicy TrainedPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read policy file: " + path);
  TrainedPolicy p;
  std::string tag, alg;
  in >> tag >> alg;
  if (tag != "algorithm") throw std::runtime_error("bad policy file header: " + path);
  p.algorithm = alg == "pg" ? Algorithm::PolicyGradient : Algorithm::QLearning;
  std::uint64_t key;
  while (in >> key) {
    std::array<double, kNumGridActions> row{};
    for (double& v : row) in >> v;
    p.table[key] = row;
  }
  return p;
}

namespace {

// Per-episode reward and masking semantics of one ablation mode.
class ModeRuntime {
 public:
  ModeRuntime(const SpaceBundle& bundle, const std::vector<SubtaskSpec>& subtasks,
              const RewardSettings& rewards, AblationMode mode)
      : bundle_(bundle), subtasks_(subtasks), rewards_(rewards), mode_(mode) {
    if (mode_ != AblationMode::Task) tree_ = build_template(subtasks_, bundle_.schema, rewards_);
    full_ = ActionMask::full(bundle_.schema);
  }

  // Returns the initial action mask; the initial tick's reward is dropped
  // because no transition produced it.
  ActionMask begin_episode(const EnvState& s0, const Task& task) {
    latched_ = 0;
    subtask_reward_.assign(subtasks_.size(), 0.0);
    switch (mode_) {
      case AblationMode::Task:
        return full_;
      case AblationMode::Procedure: {
        GridView view(s0, bundle_.schema);
        LabelAssignment sigma = label(subtasks_, view, task.bindings);
        for (size_t i = 0; i < subtasks_.size(); ++i) {
          if (sigma.contains(psi_formula_id(static_cast<int>(i)))) latched_ |= 1u << i;
        }
        return full_;
      }
      case AblationMode::Rbt:
      case AblationMode::Mrbt: {
        tree_.reset();
        GridView view(s0, bundle_.schema);
        TickResult res = tree_.tick(label(subtasks_, view, task.bindings));
        return mode_ == AblationMode::Mrbt ? res.mask : full_;
      }
    }
    return full_;
  }

  // Shaping reward for arriving in s_next, plus the next action mask.
  std::pair<double, ActionMask> on_transition(const EnvState& s_next, const Task& task,
                                              bool goal_reached) {
    double bonus = goal_reached ? rewards_.task_bonus : 0.0;
    switch (mode_) {
      case AblationMode::Task:
        return {bonus, full_};
      case AblationMode::Procedure: {
        GridView view(s_next, bundle_.schema);
        LabelAssignment sigma = label(subtasks_, view, task.bindings);
        double r = 0.0;
        for (size_t i = 0; i < subtasks_.size(); ++i) {
          if ((latched_ & (1u << i)) == 0 &&
              sigma.contains(psi_formula_id(static_cast<int>(i)))) {
            latched_ |= 1u << i;
            r += rewards_.condition_reward;
            subtask_reward_[i] += rewards_.condition_reward;
          }
        }
        return {r + bonus, full_};
      }
      case AblationMode::Rbt:
      case AblationMode::Mrbt: {
        GridView view(s_next, bundle_.schema);
        TickResult res = tree_.tick(label(subtasks_, view, task.bindings));
        return {res.reward + bonus, mode_ == AblationMode::Mrbt ? res.mask : full_};
      }
    }
    return {bonus, full_};
  }

  bool masked() const { return mode_ == AblationMode::Mrbt; }

  // Procedure invariant: per-episode cumulative reward of each subtask is
  // either zero or exactly one completion reward.
  bool procedure_episode_ok() const {
    if (mode_ != AblationMode::Procedure) return true;
    for (double r : subtask_reward_) {
      if (r != 0.0 && std::abs(r - rewards_.condition_reward) > 1e-12) return false;
    }
    return true;
  }

 private:
  const SpaceBundle& bundle_;
  const std::vector<SubtaskSpec>& subtasks_;
  RewardSettings rewards_;
  AblationMode mode_;
  Mrbt tree_;
  ActionMask full_;
  std::uint32_t latched_ = 0;
  std::vector<double> subtask_reward_;
};

int explore_action(const ActionMask* mask, RngStream& rng) {
  if (!mask) return rng.below_int(kNumGridActions);
  std::vector<int> allowed = mask->indices();
  return allowed[rng.below_int(static_cast<int>(allowed.size()))];
}

double masked_max(const std::array<double, kNumGridActions>* row, const ActionMask* mask,
                  double missing) {
  double best = 0.0;
  bool any = false;
  for (int a = 0; a < kNumGridActions; ++a) {
    if (mask && !mask->test(a)) continue;
    double v = row ? (*row)[a] : missing;
    if (!any || v > best) {
      best = v;
      any = true;
    }
  }
  return any ? best : missing;
}

std::array<double, kNumGridActions>& ensure_row(
    std::unordered_map<std::uint64_t, std::array<double, kNumGridActions>>& table,
    std::uint64_t key, double init) {
  auto [it, inserted] = table.try_emplace(key);
  if (inserted) it->second.fill(init);
  return it->second;
}

struct PgStep {
  std::uint64_t key;
  int action;
  ActionMask mask;
  bool use_mask;
  double reward;
};

SeedResult train_one_seed(const SpaceBundle& bundle, const std::vector<SubtaskSpec>& subtasks,
                          const RewardSettings& rewards, AblationMode mode,
                          const TrainConfig& cfg, std::uint64_t seed) {
  SeedResult result;
  result.seed = seed;
  result.policy.algorithm = cfg.algorithm;

  ModeRuntime runtime(bundle, subtasks, rewards, mode);
  RngStream init_rng = RngStream::seeded(seed, 0x1417);
  RngStream env_rng = RngStream::seeded(seed, 0xe471);
  RngStream explore_rng = RngStream::seeded(seed, 0xac7);

  auto& table = result.policy.table;
  long step = 0;
  long next_emit = cfg.window;
  long win_episodes = 0;
  double win_success = 0.0;
  double win_reward = 0.0;
  MetricPoint last{0, 0.0, 0.0};
  double pg_baseline = 0.0;
  bool pg_baseline_init = false;

  double anneal_steps = std::max(1.0, cfg.eps_decay_frac * cfg.total_steps);

  while (step < cfg.total_steps) {
    auto [s, task] = bundle.generator->sample(init_rng);
    ActionMask mask = runtime.begin_episode(s, task);
    double ep_reward = 0.0;
    bool goal = false;
    std::vector<PgStep> episode;

    for (int t = 0; t < bundle.space.max_steps && step < cfg.total_steps; ++t) {
      std::uint64_t key = state_task_key(s, task);
      const ActionMask* sel = runtime.masked() ? &mask : nullptr;

      int a;
      if (cfg.algorithm == Algorithm::QLearning) {
        double eps = cfg.eps_start +
                     (cfg.eps_final - cfg.eps_start) * std::min(1.0, step / anneal_steps);
        ensure_row(table, key, cfg.q_init);
        a = explore_rng.bernoulli(eps) ? explore_action(sel, explore_rng)
                                       : result.policy.act_greedy(key, sel);
      } else {
        a = result.policy.act_sample(key, sel, explore_rng);
      }
      if (runtime.masked() && !mask.test(a)) ++result.mask_violations;

      EnvState s_next = step_env(s, a, cfg.dynamics, &env_rng);
      goal = task_complete(task, s_next, bundle.schema);
      auto [r, next_mask] = runtime.on_transition(s_next, task, goal);
      ep_reward += r;

      if (cfg.algorithm == Algorithm::QLearning) {
        std::uint64_t key_next = state_task_key(s_next, task);
        const ActionMask* next_sel = runtime.masked() ? &next_mask : nullptr;
        auto& row = ensure_row(table, key, cfg.q_init);
        double target = r;
        if (!goal) {
          auto it = table.find(key_next);
          target += cfg.gamma * masked_max(it == table.end() ? nullptr : &it->second, next_sel,
                                           cfg.q_init);
        }
        row[a] += cfg.q_alpha * (target - row[a]);
      } else {
        episode.push_back({key, a, mask, runtime.masked(), r});
      }

      ++step;
      if (step >= next_emit) {
        if (win_episodes > 0) {
          last = MetricPoint{next_emit, win_success / win_episodes, win_reward / win_episodes};
        } else {
          last.step = next_emit;
        }
        result.points.push_back(last);
        win_episodes = 0;
        win_success = 0.0;
        win_reward = 0.0;
        next_emit += cfg.window;
      }

      s = std::move(s_next);
      mask = next_mask;
      if (goal) break;
    }

    ++result.episodes;
    ++win_episodes;
    win_success += goal ? 1.0 : 0.0;
    win_reward += ep_reward;
    if (!runtime.procedure_episode_ok()) result.procedure_rewards_ok = false;

    if (cfg.algorithm == Algorithm::PolicyGradient && !episode.empty()) {
      double g = 0.0;
      std::vector<double> returns(episode.size());
      for (int t = static_cast<int>(episode.size()) - 1; t >= 0; --t) {
        g = episode[t].reward + cfg.gamma * g;
        returns[t] = g;
      }
      for (size_t t = 0; t < episode.size(); ++t) {
        const PgStep& st = episode[t];
        if (!pg_baseline_init) {
          pg_baseline = returns[t];
          pg_baseline_init = true;
        }
        double adv = returns[t] - pg_baseline;
        pg_baseline = 0.99 * pg_baseline + 0.01 * returns[t];
        auto& row = table[st.key];
        const ActionMask* sel = st.use_mask ? &st.mask : nullptr;
        double maxv = -1e300;
        for (int a2 = 0; a2 < kNumGridActions; ++a2) {
          if (sel && !sel->test(a2)) continue;
          maxv = std::max(maxv, row[a2]);
        }
        double z = 0.0;
        std::array<double, kNumGridActions> p{};
        for (int a2 = 0; a2 < kNumGridActions; ++a2) {
          if (sel && !sel->test(a2)) continue;
          p[a2] = std::exp(row[a2] - maxv);
          z += p[a2];
        }
        for (int a2 = 0; a2 < kNumGridActions; ++a2) {
          if (sel && !sel->test(a2)) continue;
          double grad = (a2 == st.action ? 1.0 : 0.0) - p[a2] / z;
          row[a2] += cfg.pg_learning_rate * adv * grad;
        }
      }
    }
  }

  result.final_success = evaluate(result.policy, bundle, subtasks, rewards, mode,
                                  cfg.eval_episodes, cfg.dynamics, seed);
  return result;
}

}  // namespace

double evaluate(const TrainedPolicy& policy, const SpaceBundle& bundle,
                const std::vector<SubtaskSpec>& subtasks, const RewardSettings& rewards,
                AblationMode mode, int episodes, const DynamicsConfig& dynamics,
                std::uint64_t seed) {
  ModeRuntime runtime(bundle, subtasks, rewards, mode);
  RngStream init_rng = RngStream::seeded(seed, 0xeea1);
  RngStream env_rng = RngStream::seeded(seed, 0xeea2);
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    auto [s, task] = bundle.generator->sample(init_rng);
    ActionMask mask = runtime.begin_episode(s, task);
    for (int t = 0; t < bundle.space.max_steps; ++t) {
      std::uint64_t key = state_task_key(s, task);
      int a = policy.act_greedy(key, runtime.masked() ? &mask : nullptr);
      EnvState s_next = step_env(s, a, dynamics, &env_rng);
      bool goal = task_complete(task, s_next, bundle.schema);
      auto [r, next_mask] = runtime.on_transition(s_next, task, goal);
      (void)r;
      s = std::move(s_next);
      mask = next_mask;
      if (goal) {
        ++successes;
        break;
      }
    }
  }
  return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
}

TrainReport train(const SpaceBundle& bundle, const std::vector<SubtaskSpec>& subtasks,
                  const RewardSettings& rewards, AblationMode mode, const TrainConfig& cfg) {
  TrainReport report;
  report.mode = mode;
  report.config = cfg;
  report.space_name = bundle.space.name;

  int workers = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  std::vector<std::future<SeedResult>> futs;
  report.seeds.resize(cfg.seeds.size());
  size_t next = 0;
  while (next < cfg.seeds.size()) {
    size_t batch = std::min(cfg.seeds.size() - next, static_cast<size_t>(workers));
    futs.clear();
    for (size_t j = 0; j < batch; ++j) {
      std::uint64_t seed = cfg.seeds[next + j];
      futs.push_back(std::async(std::launch::async, [&, seed] {
        return train_one_seed(bundle, subtasks, rewards, mode, cfg, seed);
      }));
    }
    for (size_t j = 0; j < batch; ++j) report.seeds[next + j] = futs[j].get();
    next += batch;
  }
  return report;
}

long SeedResult::steps_to(double threshold) const {
  for (const MetricPoint& p : points) {
    if (p.success_rate >= threshold) return p.step;
  }
  return -1;
}

double TrainReport::mean_final_success() const {
  if (seeds.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : seeds) s += r.final_success;
  return s / seeds.size();
}

void write_metrics_csv(std::ostream& os, const TrainReport& report) {
  os << "global_step,seed,mode,success_rate,mean_episode_reward\n";
  for (const auto& seed : report.seeds) {
    for (const auto& p : seed.points) {
      os << p.step << ',' << seed.seed << ',' << mode_name(report.mode) << ','
         << p.success_rate << ',' << p.mean_episode_reward << "\n";
    }
  }
}

}  // namespace mrbt
