#pragma once

#include <map>
#include <string>

#include "mrbt/task_space.hpp"
#include "mrbt/verifier.hpp"

namespace mrbt {

// Prompt templates for the decomposition pipeline. Placeholders like
// {mission} are substituted at build time. Defaults are built in; any
// template can be overridden by a file of the same name in a directory.
struct PromptLibrary {
  std::string system;
  std::string request_subtasks;
  std::string request_psi;
  std::string request_phi;
  std::string request_masks;
  std::string retry_parse_error;
  std::string debug_counterexample;
  std::string debug_non_trivial;
  std::string debug_persistence;

  static PromptLibrary defaults();
  static PromptLibrary from_dir(const std::string& dir);
};

std::string substitute(const std::string& tpl,
                       const std::map<std::string, std::string>& vars);

// Renders the schema, DSL grammar, action set and task description into
// the system prompt.
std::string build_system_prompt(const PromptLibrary& lib, const SpaceBundle& bundle);

}  // namespace mrbt
