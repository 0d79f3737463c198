#pragma once

#include <string>
#include <vector>

#include "backend.hpp"
#include "errors.hpp"
#include "perplexity.hpp"
#include "refine.hpp"

namespace cpr {

struct DescribeParams {
  int max_descriptions = 5;   // m
  double ppl_threshold = 15;  // tau
  int top_k = 3;              // k
  bool dedup = false;

  void validate() const;  // throws InvalidConfigError
};

enum class HaltReason { cap_reached, threshold_exceeded };

struct Description {
  std::string text;
  PerplexityScore ppl;
  int gen_index = 0;
};

struct DescriptionSet {
  std::vector<Description> items;  // ascending ppl, ties by gen_index
  HaltReason halted_by = HaltReason::cap_reached;
};

// Mid-loop backend failure; carries descriptions accepted before the failure.
class DescribeError : public Error {
 public:
  DescribeError(std::string message, std::vector<Description> partial)
      : Error(ErrorCode::partial_failure, std::move(message)), partial_(std::move(partial)) {}
  const std::vector<Description>& partial() const { return partial_; }

 private:
  std::vector<Description> partial_;
};

// Candidate generation loop: keep generating while fewer than m descriptions
// are accepted; a candidate whose perplexity exceeds tau is discarded and the
// loop stops. Survivors are sorted by perplexity ascending (generation order
// breaks ties) and truncated to the top k.
DescriptionSet generate_descriptions(const CleanedPrompt& cleaned, const DescribeParams& params,
                                     const LmClient& backend,
                                     const TemplateStore& templates = TemplateStore{});

// Same selection logic over a pre-scored candidate stream; the loop above and
// the fuzz suites are built on this.
DescriptionSet select_descriptions(const std::vector<std::pair<std::string, PerplexityScore>>& stream,
                                   const DescribeParams& params);

}  // namespace cpr
