#include "mrbt/prompts.hpp"

#include <fstream>
#include <sstream>

namespace mrbt {

namespace {

const char* kSystem = R"(You decompose gridworld tasks into ordered subtasks for a masking
reward behavior tree. Work in a {grid_size}x{grid_size} grid.

Task family: {mission}
Task variables: {variables}

State predicates (use exactly these names):
{predicates}

Primitive actions: {actions}

Formula language, one formula per line:
  atoms     compare predicates, task variables, integers, colors, OPEN,
            CLOSED, LOCKED, coordinates (x, y) with == != < <= > >=
  distance  manhattan(a, b) for coordinate operands
  logic     ! (not), && (and), || (or), -> (implies), parentheses
  absence   a coordinate predicate equals -1 when its object is out of
            play or when the agent stands on it; scalar predicates report
            -1 the same way

When asked for a formula, answer with exactly one formula inside a fenced
code block. When asked for a list, put one item per line inside a fenced
code block. No prose inside the fences.)";

const char* kRequestSubtasks = R"(Break the task into the smallest ordered list of subtasks that
solves it. Each subtask achieves one persistent condition. Reply with one
short subtask name per line in a fenced code block.)";

const char* kRequestPsi = R"(Subtask {index} of {count}: "{name}".
Give the completion formula: it must hold exactly when this subtask has
been achieved, and it should stay true for the rest of a successful
episode. Reply with one formula in a fenced code block.)";

const char* kRequestPhi = R"(Subtask {index} of {count}: "{name}" with completion formula
{psi}
Give the progress formula: it must hold whenever the agent is in a
position to complete the subtask with a single interaction (for example
next to the relevant object), and in any state where the completion
formula already holds. Reply with one formula in a fenced code block.)";

const char* kRequestMasks = R"(Subtask {index} of {count}: "{name}".
Choose the actions useful while moving toward the subtask (navigation)
and while completing it up close (interaction). Reply in a fenced code
block with exactly two lines:
nav: <action names separated by spaces>
interact: <action names separated by spaces>)";

const char* kRetryParseError = R"(That reply could not be used: {error}
Answer again, following the requested format exactly.)";

const char* kDebugCounterexample = R"(Verification found a violation of {spec} for subtask
"{name}". The {which} formula currently reads:
{formula}

A concrete trajectory shows the problem:
{trace}

Revise the {which} formula for this subtask only. Remember that
predicates report -1 while the agent stands on the object. Reply with one
formula in a fenced code block.)";

const char* kDebugNonTrivial = R"(Verification found that {spec} fails for subtask "{name}":
{detail}
The {which} formula currently reads:
{formula}

The formula is satisfied from the start, so it cannot drive learning.
Make it demand an actual change in the world. Reply with one formula in a
fenced code block.)";

const char* kDebugPersistence = R"(Verification found a composition persistence violation. Subtask
{index} ("{name}") has completion formula
{formula}
which becomes true and later false again on every successful trajectory:
{detail}

Remember that predicates report -1 while the agent stands on the object,
so a condition like an open door should also accept the absent value.
Revise the completion formula of this subtask only. Reply with one
formula in a fenced code block.)";

std::string read_file_or(const std::string& path, const std::string& fallback) {
  std::ifstream in(path);
  if (!in) return fallback;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  lib.system = kSystem;
  lib.request_subtasks = kRequestSubtasks;
  lib.request_psi = kRequestPsi;
  lib.request_phi = kRequestPhi;
  lib.request_masks = kRequestMasks;
  lib.retry_parse_error = kRetryParseError;
  lib.debug_counterexample = kDebugCounterexample;
  lib.debug_non_trivial = kDebugNonTrivial;
  lib.debug_persistence = kDebugPersistence;
  return lib;
}

PromptLibrary PromptLibrary::from_dir(const std::string& dir) {
  PromptLibrary d = defaults();
  PromptLibrary lib;
  lib.system = read_file_or(dir + "/system.txt", d.system);
  lib.request_subtasks = read_file_or(dir + "/request_subtasks.txt", d.request_subtasks);
  lib.request_psi = read_file_or(dir + "/request_psi.txt", d.request_psi);
  lib.request_phi = read_file_or(dir + "/request_phi.txt", d.request_phi);
  lib.request_masks = read_file_or(dir + "/request_masks.txt", d.request_masks);
  lib.retry_parse_error = read_file_or(dir + "/retry_parse_error.txt", d.retry_parse_error);
  lib.debug_counterexample =
      read_file_or(dir + "/debug_counterexample.txt", d.debug_counterexample);
  lib.debug_non_trivial = read_file_or(dir + "/debug_non_trivial.txt", d.debug_non_trivial);
  lib.debug_persistence = read_file_or(dir + "/debug_persistence.txt", d.debug_persistence);
  return lib;
}

std::string substitute(const std::string& tpl,
                       const std::map<std::string, std::string>& vars) {
  std::string out;
  size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      size_t e = tpl.find('}', i);
      if (e != std::string::npos) {
        auto it = vars.find(tpl.substr(i + 1, e - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = e + 1;
          continue;
        }
      }
    }
    out += tpl[i++];
  }
  return out;
}

std::string build_system_prompt(const PromptLibrary& lib, const SpaceBundle& bundle) {
  std::ostringstream preds;
  for (const auto& p : bundle.schema.predicates) {
    preds << "  " << p.name;
    if (p.color_indexed) preds << "[color]";
    preds << " : " << (p.kind == PredKind::Coord2 ? "coordinate" : "integer") << "\n";
  }
  std::ostringstream actions;
  for (size_t i = 0; i < bundle.schema.actions.size(); ++i) {
    if (i) actions << ' ';
    actions << bundle.schema.actions[i];
  }
  std::ostringstream vars;
  if (bundle.space.variables.empty()) {
    vars << "none";
  } else {
    for (const auto& v : bundle.space.variables) {
      vars << v.name << " (a color) ";
    }
    for (const auto& [n, src] : bundle.space.derived) {
      vars << n << " (same color as " << src << ") ";
    }
  }
  return substitute(lib.system,
                    {{"grid_size", std::to_string(bundle.space.grid_size)},
                     {"mission", bundle.space.mission_template},
                     {"variables", vars.str()},
                     {"predicates", preds.str()},
                     {"actions", actions.str()}});
}

}  // namespace mrbt
