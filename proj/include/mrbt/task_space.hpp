#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mrbt/gridworld.hpp"

namespace mrbt {

struct TaskVariable {
  std::string name;
  std::vector<int> domain;  // color indices
};

// A parameterized family of tasks over one environment: a mission sentence
// template, task variables with domains, and the goal condition G.
struct TaskSpace {
  std::string name;
  int grid_size = 0;
  int max_steps = 0;
  std::string mission_template;
  std::vector<TaskVariable> variables;
  std::vector<std::pair<std::string, std::string>> derived;  // name -> source variable
  std::vector<std::string> goal_texts;
  std::vector<Formula> goals;
  std::vector<std::string> vocab;

  std::set<std::string> task_var_names() const;
  long variant_count() const;  // product of free-variable domain sizes
  std::string instantiate_mission(const TaskBindings& b) const;
  std::vector<int> encode_mission(const std::string& mission) const;
};

struct Task {
  std::string mission;
  TaskBindings bindings;
  std::vector<Formula> goals;
  std::vector<int> encoding;

  std::uint64_t hash() const;
  bool operator==(const Task& o) const { return bindings == o.bindings; }
};

bool task_complete(const Task& t, const EnvState& s, const EnvSchema& schema);

// Enumerable family of initial conditions. Every entry is solvable within
// the space's step budget; sampling draws uniformly from the enumeration,
// so the family doubles as the exact domain for verification.
class EpisodeGenerator {
 public:
  virtual ~EpisodeGenerator() = default;
  virtual long init_count() const = 0;
  virtual std::pair<EnvState, Task> init_at(long idx) const = 0;
  std::pair<EnvState, Task> sample(RngStream& rng) const {
    return init_at(static_cast<long>(rng.below(static_cast<std::uint64_t>(init_count()))));
  }
};

struct SpaceBundle {
  TaskSpace space;
  EnvSchema schema;
  std::shared_ptr<EpisodeGenerator> generator;
};

// name: doorkey | lockedroom | dronesupplier. scale picks the grid size
// (0 = the space's full size). Supported scales: doorkey any even size in
// [6, 20] (full 16), lockedroom {9, 19}, dronesupplier {10, 25}.
SpaceBundle make_task_space(const std::string& name, int scale = 0);
std::vector<std::string> known_spaces();

// Parses an ASCII map: '#' wall, '.' floor, 'a'-'f' doors, 'A'-'F' boxes,
// 'G' goal, '@' or '>'/'v'/'<'/'^' the agent start.
struct ParsedMap {
  Layout layout;
  Coord agent = kNowhere;
  int agent_dir = 0;
};
ParsedMap parse_map(const std::string& text);

}  // namespace mrbt
