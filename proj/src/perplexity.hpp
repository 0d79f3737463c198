#pragma once

#include <cstddef>
#include <span>

namespace cpr {

struct PerplexityScore {
  double value = 0.0;
  std::size_t token_count = 0;
};

// exp of the negative mean token log-probability. Throws EmptyInputError on an
// empty list and NonFiniteError on NaN/inf entries.
PerplexityScore ppl(std::span<const double> logprobs);

}  // namespace cpr
