#pragma once

#include <optional>
#include <string>

#include "backend.hpp"

namespace cpr {

enum class IfDegree { low, high };

struct PromptRecord {
  std::string id;
  std::string raw_text;
  std::optional<double> well_formedness;  // in [0,1]
  std::optional<IfDegree> if_degree;
};

struct CleanedPrompt {
  std::string source_id;
  std::string text;
  bool fallback = false;  // backend returned nothing usable; text is the raw prompt
};

// Strips a leading "Output:"/"Answer:" scaffold and surrounding quotes, then
// trims whitespace. Exposed for tests.
std::string strip_scaffold(const std::string& text);

// One backend call turning an ill-formed prompt into a well-formed one.
CleanedPrompt clean(const PromptRecord& prompt, const LmClient& backend,
                    const TemplateStore& templates = TemplateStore{});

}  // namespace cpr
