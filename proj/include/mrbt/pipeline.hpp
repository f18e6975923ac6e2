#pragma once

#include "mrbt/generator.hpp"
#include "mrbt/prompts.hpp"
#include "mrbt/spec_file.hpp"
#include "mrbt/verifier.hpp"

namespace mrbt {

struct PipelineConfig {
  int max_iterations = 5;   // generate+verify rounds
  int parse_retries = 3;    // re-asks after a malformed reply
  VerifyConfig verify;
};

struct PipelineResult {
  MrbtSpecFile spec;
  std::vector<VerifyVerdict> verdicts;
  int iterations = 0;
  bool verified = false;
  std::vector<ChatMessage> transcript;
  std::string failure_reason;  // set when !verified
};

// Generate -> verify -> refine loop. The first iteration elicits the
// subtask list, formulas and masks; each later iteration regenerates only
// the formula blamed by the first failing verdict and re-verifies.
PipelineResult run_pipeline(const SpaceBundle& bundle, Generator& gen,
                            const PipelineConfig& cfg,
                            const PromptLibrary& lib = PromptLibrary::defaults());

// Builds the refinement prompt for a failing verdict (exposed for tests).
std::string build_debug_prompt(const PromptLibrary& lib, const VerifyVerdict& verdict,
                               const MrbtSpecFile& spec,
                               const std::vector<SubtaskSpec>& subtasks,
                               const EnvSchema& schema);

// Extracts the payload of the first fenced code block, or the trimmed
// whole text when no fence is present.
std::string extract_fenced(const std::string& reply);

}  // namespace mrbt
