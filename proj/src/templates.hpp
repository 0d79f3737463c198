#pragma once

#include <string>

namespace cpr {

// Named prompt-template assets. Built-in defaults ship with the library; a
// prompts directory (one .txt file per name) overrides them when configured.
class TemplateStore {
 public:
  TemplateStore() = default;
  explicit TemplateStore(std::string prompts_dir) : prompts_dir_(std::move(prompts_dir)) {}

  // Throws InvalidConfigError for unknown names.
  std::string get(const std::string& name) const;
  static bool is_known(const std::string& name);

  // Replaces every "{prompt}" placeholder.
  static std::string render(const std::string& tmpl, const std::string& prompt);

 private:
  std::string prompts_dir_;
};

inline constexpr const char* kCleanTemplate = "clean_v1";
inline constexpr const char* kDescribeTemplate = "describe_v1";
inline constexpr const char* kRubricHi = "rubric_hi_v1";
inline constexpr const char* kRubricCqs = "rubric_cqs_v1";
inline constexpr const char* kRubricPairwise = "rubric_pairwise_v1";
inline constexpr const char* kRubricRelevance = "rubric_relevance_v1";
inline constexpr const char* kRubricCoherence = "rubric_coherence_v1";
inline constexpr const char* kInstrRepair = "instr_repair_v1";
inline constexpr const char* kInstrParaphrase = "instr_paraphrase_v1";
inline constexpr const char* kInstrDescribe = "instr_describe_v1";

}  // namespace cpr
