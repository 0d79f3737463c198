#include "perplexity.hpp"

#include <cmath>

#include "errors.hpp"

namespace cpr {

PerplexityScore ppl(std::span<const double> logprobs) {
  if (logprobs.empty()) {
    throw EmptyInputError("ppl: empty logprob sequence");
  }
  double sum = 0.0;
  for (double lp : logprobs) {
    if (!std::isfinite(lp)) {
      throw NonFiniteError("ppl: non-finite logprob");
    }
    sum += lp;
  }
  const double n = static_cast<double>(logprobs.size());
  return PerplexityScore{std::exp(-sum / n), logprobs.size()};
}

}  // namespace cpr
