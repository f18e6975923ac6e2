#pragma once

#include <set>
#include <string>
#include <vector>

#include "mrbt/mrbt_template.hpp"

namespace mrbt {

// Persistent description of a task decomposition: the formulas and masks
// of each subtask, one formula per line, plus reward settings and
// provenance of the generation run.
struct MrbtSpecFile {
  struct Entry {
    std::string name;
    std::string psi_text;
    std::string phi_text;
    std::vector<std::string> mask_nav;
    std::vector<std::string> mask_interact;
  };

  std::string space_name;
  std::vector<Entry> subtasks;
  RewardSettings rewards;
  std::string generator_id;
  int iterations = 0;
  bool verified = false;

  // Parses and type checks all formulas against the schema; throws
  // ParseError (with subtask context prepended) on the first bad formula.
  std::vector<SubtaskSpec> parse_subtasks(const EnvSchema& schema,
                                          const std::set<std::string>& task_vars) const;

  std::string to_text() const;
  static MrbtSpecFile from_text(const std::string& text);
  void save(const std::string& path) const;
  static MrbtSpecFile load(const std::string& path);
};

}  // namespace mrbt
