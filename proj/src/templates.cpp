#include "templates.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace cpr {
namespace {

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table = {
      {kCleanTemplate,
       "Rewrite the following question so it is grammatically correct and "
       "unambiguous. Output only the rewritten question.\n\nQuestion: {prompt}"},
      {kDescribeTemplate,
       "Write one short factual description of the topic of this question. "
       "Output only the description.\n\nQuestion: {prompt}"},
      {kRubricHi,
       "Rate how much of the response is hallucinated relative to the prompt. "
       "0 means fully factual, 1 means entirely fabricated. "
       "Reply with exactly one line of the form 'SCORE: <value between 0 and 1>'.\n\n{prompt}"},
      {kRubricCqs,
       "Rate the relevance, coherence, and overall value of the response on a "
       "scale from 0 (irrelevant or incoherent) to 1 (relevant and coherent). "
       "Reply with exactly one line of the form 'SCORE: <value between 0 and 1>'.\n\n{prompt}"},
      {kRubricPairwise,
       "You are comparing two responses to the same prompt. Decide which one is "
       "better overall. Reply with exactly one line of the form "
       "'verdict: A', 'verdict: B', or 'verdict: tie'.\n\n{prompt}"},
      {kRubricRelevance,
       "Rate how well the description addresses the task in the prompt, from 0 "
       "(no relevance) to 1 (maximum relevance). "
       "Reply with exactly one line of the form 'SCORE: <value between 0 and 1>'.\n\n{prompt}"},
      {kInstrRepair,
       "Rewrite the following text so it is free of punctuation errors. "
       "Output only the corrected text."},
      {kInstrParaphrase,
       "Rewrite the following question so it is grammatically correct and "
       "unambiguous. Output only the rewritten question."},
      {kInstrDescribe,
       "Write one short factual description of the following keyword. "
       "Output only the description."},
      {kRubricCoherence,
       "Rate the logical consistency of the description and how smoothly it "
       "integrates with the prompt, from 0 (illogical) to 1 (perfectly coherent). "
       "Reply with exactly one line of the form 'SCORE: <value between 0 and 1>'.\n\n{prompt}"},
  };
  return table;
}

}  // namespace

bool TemplateStore::is_known(const std::string& name) { return builtins().count(name) > 0; }

std::string TemplateStore::get(const std::string& name) const {
  if (!prompts_dir_.empty()) {
    const auto path = std::filesystem::path(prompts_dir_) / (name + ".txt");
    std::ifstream in(path);
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      return buf.str();
    }
  }
  auto it = builtins().find(name);
  if (it == builtins().end()) {
    throw InvalidConfigError("unknown template: " + name);
  }
  return it->second;
}

std::string TemplateStore::render(const std::string& tmpl, const std::string& prompt) {
  std::string out;
  out.reserve(tmpl.size() + prompt.size());
  std::size_t pos = 0;
  static const std::string kPlaceholder = "{prompt}";
  while (true) {
    const auto hit = tmpl.find(kPlaceholder, pos);
    if (hit == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      return out;
    }
    out.append(tmpl, pos, hit - pos);
    out.append(prompt);
    pos = hit + kPlaceholder.size();
  }
}

}  // namespace cpr
