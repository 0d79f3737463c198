#pragma once

#include <optional>
#include <string>
#include <vector>

#include "describe.hpp"
#include "refine.hpp"

namespace cpr {

inline constexpr const char* kRefinedSchema = "cpr/refined/v1";

enum class Layout { context_then_question, question_then_context };

struct StageEvent {
  std::string stage;  // clean | describe | assemble | degrade
  double duration_ms = 0.0;
  int backend_calls = 0;
};

struct RefinedPrompt {
  PromptRecord source;
  CleanedPrompt cleaned;
  DescriptionSet descriptions;
  std::string final_text;
  std::vector<StageEvent> trace;
};

struct PipelineOptions {
  DescribeParams describe;
  Layout layout = Layout::context_then_question;
  bool enable_descriptions = true;  // off = "without descriptions" variant
  bool degrade = false;             // describe failure falls back to no-descriptions output
};

// Deterministic final-prompt assembly. With no descriptions the cleaned text
// is returned unchanged.
std::string assemble(const CleanedPrompt& cleaned, const DescriptionSet& descriptions,
                     Layout layout);

RefinedPrompt run_pipeline(const PromptRecord& prompt, const PipelineOptions& options,
                           const LmClient& refine_backend, const LmClient& describe_backend,
                           const TemplateStore& templates = TemplateStore{});

struct BatchItem {
  std::optional<RefinedPrompt> result;
  std::string error;  // empty on success
};

// Bounded parallel map over prompts; results land in input order and a failed
// item never aborts the batch.
std::vector<BatchItem> run_batch(const std::vector<PromptRecord>& prompts,
                                 const PipelineOptions& options, const LmClient& refine_backend,
                                 const LmClient& describe_backend, int parallelism,
                                 const TemplateStore& templates = TemplateStore{});

// JSONL wire formats.
PromptRecord prompt_record_from_json(const std::string& line);
std::vector<PromptRecord> read_prompt_jsonl(const std::string& path);
std::string refined_prompt_to_json(const RefinedPrompt& refined, bool include_timings = false);
std::string batch_item_to_json(const PromptRecord& source, const BatchItem& item,
                               bool include_timings = false);

}  // namespace cpr
