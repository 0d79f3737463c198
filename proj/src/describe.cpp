#include "describe.hpp"

#include <algorithm>

#include "errors.hpp"

namespace cpr {

void DescribeParams::validate() const {
  if (max_descriptions <= 0) throw InvalidConfigError("describe: m must be positive");
  if (top_k <= 0) throw InvalidConfigError("describe: k must be positive");
  if (top_k > max_descriptions) throw InvalidConfigError("describe: k must be <= m");
  if (ppl_threshold <= 1.0) throw InvalidConfigError("describe: tau must be > 1");
}

namespace {

void sort_and_truncate(std::vector<Description>& items, int top_k) {
  std::stable_sort(items.begin(), items.end(), [](const Description& a, const Description& b) {
    return a.ppl.value < b.ppl.value;
  });
  if (static_cast<int>(items.size()) > top_k) items.resize(static_cast<std::size_t>(top_k));
}

}  // namespace

DescriptionSet select_descriptions(
    const std::vector<std::pair<std::string, PerplexityScore>>& stream,
    const DescribeParams& params) {
  params.validate();
  DescriptionSet out;
  std::vector<Description> accepted;
  HaltReason halt = HaltReason::cap_reached;
  int index = 0;
  for (const auto& [text, score] : stream) {
    if (static_cast<int>(accepted.size()) >= params.max_descriptions) break;
    if (score.value > params.ppl_threshold) {
      halt = HaltReason::threshold_exceeded;
      break;
    }
    const bool duplicate =
        params.dedup && std::any_of(accepted.begin(), accepted.end(),
                                    [&](const Description& d) { return d.text == text; });
    if (!duplicate) {
      accepted.push_back(Description{text, score, index});
    }
    ++index;
  }
  sort_and_truncate(accepted, params.top_k);
  out.items = std::move(accepted);
  out.halted_by = halt;
  return out;
}

DescriptionSet generate_descriptions(const CleanedPrompt& cleaned, const DescribeParams& params,
                                     const LmClient& backend, const TemplateStore& templates) {
  params.validate();
  const std::string tmpl = templates.get(kDescribeTemplate);
  const std::string user_prompt = TemplateStore::render(tmpl, cleaned.text);

  std::vector<Description> accepted;
  HaltReason halt = HaltReason::cap_reached;
  int index = 0;
  // With dedup on, discarded duplicates do not count toward m; bound total
  // generations so a backend stuck on one text cannot spin forever.
  const int max_generations = params.max_descriptions * 4;
  while (static_cast<int>(accepted.size()) < params.max_descriptions &&
         index < max_generations) {
    ScoredGeneration gen;
    try {
      gen = backend.generate("", user_prompt);
    } catch (const Error& e) {
      throw DescribeError(std::string("describe: backend failure at candidate ") +
                              std::to_string(index) + ": " + e.what(),
                          std::move(accepted));
    }
    const auto lps = gen.logprobs();
    const PerplexityScore score = ppl(lps);
    if (score.value > params.ppl_threshold) {
      halt = HaltReason::threshold_exceeded;
      break;
    }
    const bool duplicate =
        params.dedup && std::any_of(accepted.begin(), accepted.end(),
                                    [&](const Description& d) { return d.text == gen.text; });
    if (!duplicate) {
      accepted.push_back(Description{gen.text, score, index});
    }
    ++index;
  }
  sort_and_truncate(accepted, params.top_k);

  DescriptionSet out;
  out.items = std::move(accepted);
  out.halted_by = halt;
  return out;
}

}  // namespace cpr
