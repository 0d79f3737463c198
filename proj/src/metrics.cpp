#include "metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "errors.hpp"

namespace cpr {

std::vector<std::string> tokenize(const std::string& text, bool case_fold) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else if (c < 0x80 && case_fold) {
      word += static_cast<char>(std::tolower(c));
    } else {
      word += static_cast<char>(c);
    }
  }
  flush();
  return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                    tokens.begin() + static_cast<long>(i) + n)]++;
  }
  return counts;
}

int clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
  int matches = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

void require_nonempty(const Tokens& t, const char* who) {
  if (t.empty()) throw EmptyInputError(std::string(who) + ": empty token list");
}

}  // namespace

MetricScore bleu(const Tokens& hypothesis, const std::vector<Tokens>& references, int max_n) {
  require_nonempty(hypothesis, "bleu");
  if (references.empty()) throw EmptyInputError("bleu: no references");
  for (const auto& r : references) require_nonempty(r, "bleu");

  MetricScore score;
  score.metric = MetricKind::bleu;

  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= max_n; ++n) {
    const auto hyp_grams = count_ngrams(hypothesis, n);
    NgramCounts ref_max;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : count_ngrams(ref, n)) {
        ref_max[gram] = std::max(ref_max[gram], count);
      }
    }
    const int total = std::max<int>(0, static_cast<int>(hypothesis.size()) - n + 1);
    const int matches = clipped_matches(hyp_grams, ref_max);
    double precision;
    if (n == 1) {
      precision = total > 0 ? static_cast<double>(matches) / total : 0.0;
    } else {
      precision = static_cast<double>(matches + 1) / (total + 1);  // add-one smoothing
    }
    score.details["precision_" + std::to_string(n)] = precision;
    if (precision <= 0.0) {
      zero = true;
    } else {
      log_sum += std::log(precision);
    }
  }

  // Closest reference length; ties go to the shorter reference.
  const int c = static_cast<int>(hypothesis.size());
  int r = static_cast<int>(references.front().size());
  for (const auto& ref : references) {
    const int len = static_cast<int>(ref.size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / c) : 1.0;
  score.details["brevity_penalty"] = bp;
  score.details["hyp_len"] = c;
  score.details["ref_len"] = r;

  score.value = zero ? 0.0 : 100.0 * bp * std::exp(log_sum / max_n);
  return score;
}

namespace {

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

MetricScore f1_score(MetricKind kind, double matches, double hyp_total, double ref_total) {
  MetricScore score;
  score.metric = kind;
  const double p = hyp_total > 0 ? matches / hyp_total : 0.0;
  const double r = ref_total > 0 ? matches / ref_total : 0.0;
  const double f1 = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
  score.details["precision"] = p;
  score.details["recall"] = r;
  score.details["matches"] = matches;
  score.value = 100.0 * f1;
  return score;
}

}  // namespace

MetricScore rouge(const Tokens& hypothesis, const Tokens& reference, MetricKind variant) {
  require_nonempty(hypothesis, "rouge");
  require_nonempty(reference, "rouge");

  if (variant == MetricKind::rouge_l) {
    const double lcs = static_cast<double>(lcs_length(hypothesis, reference));
    return f1_score(variant, lcs, static_cast<double>(hypothesis.size()),
                    static_cast<double>(reference.size()));
  }
  const int n = variant == MetricKind::rouge_2 ? 2 : 1;
  const auto hyp_grams = count_ngrams(hypothesis, n);
  const auto ref_grams = count_ngrams(reference, n);
  const double hyp_total = std::max<double>(0.0, static_cast<double>(hypothesis.size()) - n + 1);
  const double ref_total = std::max<double>(0.0, static_cast<double>(reference.size()) - n + 1);
  if (hyp_total == 0 && ref_total == 0) {
    // Degenerate: inputs shorter than n. Identical inputs still count as a hit.
    MetricScore score;
    score.metric = variant;
    score.value = hypothesis == reference ? 100.0 : 0.0;
    return score;
  }
  return f1_score(variant, clipped_matches(hyp_grams, ref_grams), hyp_total, ref_total);
}

std::string light_stem(const std::string& word) {
  static const std::vector<std::string> suffixes = {"ing", "ed", "es", "ly", "s"};
  for (const auto& suffix : suffixes) {
    if (word.size() > suffix.size() + 2 && word.compare(word.size() - suffix.size(),
                                                        suffix.size(), suffix) == 0) {
      return word.substr(0, word.size() - suffix.size());
    }
  }
  return word;
}

MetricScore meteor(const Tokens& hypothesis, const Tokens& reference) {
  require_nonempty(hypothesis, "meteor");
  require_nonempty(reference, "meteor");

  // alignment[hyp_index] = ref_index, -1 when unmatched
  std::vector<int> alignment(hypothesis.size(), -1);
  std::vector<bool> ref_used(reference.size(), false);

  auto match_stage = [&](auto&& key) {
    for (std::size_t i = 0; i < hypothesis.size(); ++i) {
      if (alignment[i] >= 0) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!ref_used[j] && key(hypothesis[i]) == key(reference[j])) {
          alignment[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  };
  match_stage([](const std::string& w) { return w; });
  match_stage([](const std::string& w) { return light_stem(w); });

  int matches = 0;
  int chunks = 0;
  int prev_hyp = -2, prev_ref = -2;
  for (std::size_t i = 0; i < hypothesis.size(); ++i) {
    if (alignment[i] < 0) continue;
    ++matches;
    if (static_cast<int>(i) != prev_hyp + 1 || alignment[i] != prev_ref + 1) ++chunks;
    prev_hyp = static_cast<int>(i);
    prev_ref = alignment[i];
  }

  MetricScore score;
  score.metric = MetricKind::meteor;
  score.details["matches"] = matches;
  score.details["chunks"] = chunks;
  if (matches == 0) {
    score.value = 0.0;
    return score;
  }
  const double p = static_cast<double>(matches) / static_cast<double>(hypothesis.size());
  const double r = static_cast<double>(matches) / static_cast<double>(reference.size());
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const double penalty =
      0.5 * std::pow(static_cast<double>(chunks) / static_cast<double>(matches), 3.0);
  score.details["precision"] = p;
  score.details["recall"] = r;
  score.details["f_mean"] = f_mean;
  score.details["penalty"] = penalty;
  score.value = 100.0 * f_mean * (1.0 - penalty);
  return score;
}

std::string metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::bleu:
      return "bleu";
    case MetricKind::rouge_l:
      return "rouge_l";
    case MetricKind::rouge_1:
      return "rouge_1";
    case MetricKind::rouge_2:
      return "rouge_2";
    case MetricKind::meteor:
      return "meteor";
  }
  return {};
}

}  // namespace cpr
