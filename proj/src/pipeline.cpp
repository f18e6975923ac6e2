#include "mrbt/pipeline.hpp"

#include <sstream>
#include <stdexcept>

#include "mrbt/util.hpp"

namespace mrbt {

std::string extract_fenced(const std::string& reply) {
  size_t open = reply.find("```");
  if (open == std::string::npos) return trim(reply);
  size_t body = reply.find('\n', open);
  if (body == std::string::npos) return trim(reply);
  size_t close = reply.find("```", body);
  if (close == std::string::npos) return trim(reply.substr(body + 1));
  return trim(reply.substr(body + 1, close - body - 1));
}

namespace {

std::vector<std::string> payload_lines(const std::string& payload) {
  std::vector<std::string> out;
  std::istringstream in(payload);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

struct Session {
  Generator& gen;
  std::vector<ChatMessage> transcript;

  std::string ask(const std::string& prompt) {
    transcript.push_back({"user", prompt});
    std::string reply = gen.complete(transcript);
    transcript.push_back({"assistant", reply});
    return reply;
  }
};

// Asks, parses, and re-asks on malformed replies up to cfg.parse_retries.
template <typename Parse>
auto ask_parsed(Session& session, const PipelineConfig& cfg, const PromptLibrary& lib,
                const std::string& prompt, Parse parse) {
  std::string next_prompt = prompt;
  for (int attempt = 0;; ++attempt) {
    std::string reply = session.ask(next_prompt);
    try {
      return parse(extract_fenced(reply));
    } catch (const std::exception& e) {
      if (attempt >= cfg.parse_retries)
        throw std::runtime_error(std::string("generator reply unusable after retries: ") +
                                 e.what());
      next_prompt = substitute(lib.retry_parse_error, {{"error", e.what()}});
    }
  }
}

struct MaskPair {
  std::vector<std::string> nav;
  std::vector<std::string> interact;
};

MaskPair parse_masks(const std::string& payload, const EnvSchema& schema) {
  MaskPair out;
  bool have_nav = false;
  bool have_int = false;
  for (const std::string& line : payload_lines(payload)) {
    std::string l = line;
    if (starts_with(l, "nav:")) {
      out.nav = split_ws(l.substr(4));
      have_nav = true;
    } else if (starts_with(l, "interact:")) {
      out.interact = split_ws(l.substr(9));
      have_int = true;
    }
  }
  if (!have_nav || !have_int)
    throw std::runtime_error("expected 'nav:' and 'interact:' lines");
  if (out.nav.empty() || out.interact.empty()) throw std::runtime_error("empty action mask");
  ActionMask::from_names(schema, out.nav);
  ActionMask::from_names(schema, out.interact);
  return out;
}

std::string describe_parse_error(const ParseError& e) {
  std::ostringstream os;
  os << e.what() << " (line " << e.line << ", column " << e.col << ")";
  return os.str();
}

}  // namespace

std::string build_debug_prompt(const PromptLibrary& lib, const VerifyVerdict& verdict,
                               const MrbtSpecFile& spec,
                               const std::vector<SubtaskSpec>& subtasks,
                               const EnvSchema& schema) {
  auto trace_text = [&](const VerifyVerdict& v) {
    return v.trace ? trace_to_text(*v.trace, schema, subtasks) : std::string("(no trace)");
  };

  switch (verdict.spec) {
    case SpecKind::CompositionPersistence: {
      int st = verdict.first_violating_subtask >= 0 ? verdict.first_violating_subtask : 0;
      std::string detail = verdict.trace ? trace_text(verdict) : verdict.description;
      return substitute(lib.debug_persistence,
                        {{"index", std::to_string(st + 1)},
                         {"name", spec.subtasks[st].name},
                         {"formula", spec.subtasks[st].psi_text},
                         {"detail", detail}});
    }
    case SpecKind::CompletionNonTriviality:
    case SpecKind::ObjectProximityNonTriviality: {
      int st = verdict.subtask;
      bool is_psi = verdict.spec == SpecKind::CompletionNonTriviality;
      return substitute(lib.debug_non_trivial,
                        {{"spec", spec_kind_name(verdict.spec)},
                         {"name", spec.subtasks[st].name},
                         {"detail", verdict.description},
                         {"which", is_psi ? "completion" : "progress"},
                         {"formula",
                          is_psi ? spec.subtasks[st].psi_text : spec.subtasks[st].phi_text}});
    }
    case SpecKind::CompletionCorrectness:
    case SpecKind::ObjectProximityCorrectness: {
      int st = verdict.subtask;
      bool is_psi = verdict.spec == SpecKind::CompletionCorrectness;
      return substitute(lib.debug_counterexample,
                        {{"spec", spec_kind_name(verdict.spec)},
                         {"name", spec.subtasks[st].name},
                         {"which", is_psi ? "completion" : "progress"},
                         {"formula",
                          is_psi ? spec.subtasks[st].psi_text : spec.subtasks[st].phi_text},
                         {"trace", trace_text(verdict)}});
    }
  }
  return verdict.description;
}

PipelineResult run_pipeline(const SpaceBundle& bundle, Generator& gen,
                            const PipelineConfig& cfg, const PromptLibrary& lib) {
  const EnvSchema& schema = bundle.schema;
  std::set<std::string> task_vars = bundle.space.task_var_names();
  SymbolicModel model(bundle);

  PipelineResult result;
  result.spec.space_name = bundle.space.name;
  result.spec.generator_id = gen.id();

  Session session{gen, {}};
  session.transcript.push_back({"system", build_system_prompt(lib, bundle)});

  auto parse_formula_payload = [&](const std::string& payload) {
    auto lines = payload_lines(payload);
    if (lines.size() != 1) throw std::runtime_error("expected exactly one formula line");
    try {
      parse_formula(lines[0], schema, task_vars);
    } catch (const ParseError& e) {
      throw std::runtime_error(describe_parse_error(e));
    }
    return lines[0];
  };

  // iteration 1: full generation
  result.iterations = 1;
  std::vector<std::string> names =
      ask_parsed(session, cfg, lib, lib.request_subtasks, [&](const std::string& payload) {
        auto lines = payload_lines(payload);
        if (lines.empty()) throw std::runtime_error("expected at least one subtask name");
        if (lines.size() > 8) throw std::runtime_error("too many subtasks");
        return lines;
      });

  int count = static_cast<int>(names.size());
  for (int i = 0; i < count; ++i) {
    MrbtSpecFile::Entry entry;
    entry.name = names[i];
    std::map<std::string, std::string> base = {{"index", std::to_string(i + 1)},
                                               {"count", std::to_string(count)},
                                               {"name", names[i]}};
    entry.psi_text =
        ask_parsed(session, cfg, lib, substitute(lib.request_psi, base), parse_formula_payload);
    auto phi_vars = base;
    phi_vars["psi"] = entry.psi_text;
    entry.phi_text = ask_parsed(session, cfg, lib, substitute(lib.request_phi, phi_vars),
                                parse_formula_payload);
    MaskPair masks =
        ask_parsed(session, cfg, lib, substitute(lib.request_masks, base),
                   [&](const std::string& payload) { return parse_masks(payload, schema); });
    entry.mask_nav = masks.nav;
    entry.mask_interact = masks.interact;
    result.spec.subtasks.push_back(std::move(entry));
  }

  for (;; ++result.iterations) {
    std::vector<SubtaskSpec> subtasks = result.spec.parse_subtasks(schema, task_vars);
    result.verdicts = verify_subtasks(subtasks, model, cfg.verify);

    if (all_passed(result.verdicts)) {
      result.verified = true;
      break;
    }
    if (any_inconclusive(result.verdicts)) {
      result.failure_reason = "verification inconclusive within the time budget";
      break;
    }
    if (result.iterations >= cfg.max_iterations) {
      result.failure_reason = "iteration budget exhausted before all specifications passed";
      break;
    }

    const VerifyVerdict* failing = nullptr;
    for (const auto& v : result.verdicts) {
      if (!v.passed()) {
        failing = &v;
        break;
      }
    }

    // regenerate only the formula the failing specification blames
    int target = failing->subtask;
    bool revise_psi = true;
    switch (failing->spec) {
      case SpecKind::CompositionPersistence:
        target = failing->first_violating_subtask >= 0 ? failing->first_violating_subtask : 0;
        revise_psi = true;
        break;
      case SpecKind::CompletionCorrectness:
      case SpecKind::CompletionNonTriviality:
        revise_psi = true;
        break;
      case SpecKind::ObjectProximityCorrectness:
      case SpecKind::ObjectProximityNonTriviality:
        revise_psi = false;
        break;
    }

    std::string prompt = build_debug_prompt(lib, *failing, result.spec, subtasks, schema);
    std::string revised = ask_parsed(session, cfg, lib, prompt, parse_formula_payload);
    if (revise_psi) {
      result.spec.subtasks[target].psi_text = revised;
    } else {
      result.spec.subtasks[target].phi_text = revised;
    }
  }

  result.spec.iterations = result.iterations;
  result.spec.verified = result.verified;
  result.transcript = session.transcript;
  return result;
}

}  // namespace mrbt
