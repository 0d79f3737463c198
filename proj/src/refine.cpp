#include "refine.hpp"

#include <array>

#include "errors.hpp"

namespace cpr {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string strip_scaffold(const std::string& text) {
  std::string out = trim(text);
  static const std::array<const char*, 4> prefixes = {"Output:", "Answer:", "output:", "answer:"};
  for (const char* prefix : prefixes) {
    const std::string p(prefix);
    if (out.rfind(p, 0) == 0) {
      out = trim(out.substr(p.size()));
      break;
    }
  }
  if (out.size() >= 2 && ((out.front() == '"' && out.back() == '"') ||
                          (out.front() == '\'' && out.back() == '\''))) {
    out = trim(out.substr(1, out.size() - 2));
  }
  return out;
}

CleanedPrompt clean(const PromptRecord& prompt, const LmClient& backend,
                    const TemplateStore& templates) {
  const std::string raw = trim(prompt.raw_text);
  if (raw.empty()) throw EmptyInputError("clean: blank prompt " + prompt.id);

  const std::string tmpl = templates.get(kCleanTemplate);
  const ScoredGeneration gen = backend.generate("", TemplateStore::render(tmpl, raw));
  const std::string cleaned = strip_scaffold(gen.text);

  CleanedPrompt out;
  out.source_id = prompt.id;
  if (cleaned.empty()) {
    out.text = raw;
    out.fallback = true;
  } else {
    out.text = cleaned;
  }
  return out;
}

}  // namespace cpr
