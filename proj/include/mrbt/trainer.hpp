#pragma once

#include <array>
#include <iosfwd>
#include <unordered_map>

#include "mrbt/mrbt_template.hpp"
#include "mrbt/task_space.hpp"

namespace mrbt {

// Reward/masking ablations.
//  Task      - binary goal reward, no shaping, no masking
//  Procedure - one-shot completion rewards with latched subtasks, no
//              penalties, no masking
//  Rbt       - full tree rewards, no masking
//  Mrbt      - full tree rewards and action masking
enum class AblationMode { Task, Procedure, Rbt, Mrbt };

std::string mode_name(AblationMode m);
AblationMode mode_from_name(const std::string& name);

enum class Algorithm { QLearning, PolicyGradient };

struct TrainConfig {
  Algorithm algorithm = Algorithm::QLearning;
  long total_steps = 150000;
  int window = 2048;  // metric window, in environment steps
  double gamma = 0.99;
  double q_alpha = 0.25;
  double q_init = 0.5;  // optimistic value for unseen state-action rows
  double pg_learning_rate = 3e-4;
  double eps_start = 1.0;
  double eps_final = 0.05;
  double eps_decay_frac = 0.65;  // fraction of total_steps to anneal over
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  DynamicsConfig dynamics;
  int eval_episodes = 200;
  int threads = 0;  // parallel seeds; 0 = hardware concurrency
};

struct MetricPoint {
  long step = 0;
  double success_rate = 0.0;
  double mean_episode_reward = 0.0;
};

struct TrainedPolicy {
  Algorithm algorithm = Algorithm::QLearning;
  int num_actions = kNumGridActions;
  std::unordered_map<std::uint64_t, std::array<double, kNumGridActions>> table;

  const std::array<double, kNumGridActions>* row(std::uint64_t key) const;
  int act_greedy(std::uint64_t key, const ActionMask* mask) const;
  int act_sample(std::uint64_t key, const ActionMask* mask, RngStream& rng) const;

  void save(const std::string& path) const;
  static TrainedPolicy load(const std::string& path);
};

std::uint64_t state_task_key(const EnvState& s, const Task& task);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MetricPoint> points;
  double final_success = 0.0;
  long mask_violations = 0;
  bool procedure_rewards_ok = true;
  long episodes = 0;
  TrainedPolicy policy;

  // first window whose training success rate reaches the threshold; -1 if never
  long steps_to(double threshold) const;
};

struct TrainReport {
  AblationMode mode = AblationMode::Mrbt;
  TrainConfig config;
  std::string space_name;
  std::vector<SeedResult> seeds;

  double mean_final_success() const;
};

TrainReport train(const SpaceBundle& bundle, const std::vector<SubtaskSpec>& subtasks,
                  const RewardSettings& rewards, AblationMode mode, const TrainConfig& cfg);

double evaluate(const TrainedPolicy& policy, const SpaceBundle& bundle,
                const std::vector<SubtaskSpec>& subtasks, const RewardSettings& rewards,
                AblationMode mode, int episodes, const DynamicsConfig& dynamics,
                std::uint64_t seed);

// CSV columns: global_step, seed, mode, success_rate, mean_episode_reward
void write_metrics_csv(std::ostream& os, const TrainReport& report);

}  // namespace mrbt
