#pragma once

#include <map>
#include <string>
#include <vector>

namespace cpr {

enum class MetricKind { bleu, rouge_l, rouge_1, rouge_2, meteor };

struct MetricScore {
  MetricKind metric = MetricKind::bleu;
  double value = 0.0;  // in [0,100]
  std::map<std::string, double> details;
};

// Whitespace tokenizer with punctuation split into single-character tokens;
// lowercases when case_fold is set. Input is treated as UTF-8; multi-byte
// sequences pass through untouched.
std::vector<std::string> tokenize(const std::string& text, bool case_fold = true);

using Tokens = std::vector<std::string>;

// Sentence BLEU with modified n-gram precision, add-one smoothing on orders
// >= 2, and the exp(1 - r/c) brevity penalty. Scaled to [0,100].
MetricScore bleu(const Tokens& hypothesis, const std::vector<Tokens>& references, int max_n = 4);

MetricScore rouge(const Tokens& hypothesis, const Tokens& reference, MetricKind variant);

// Exact + stem matching stages, F_mean = 10PR/(R+9P), chunk penalty
// 0.5*(chunks/matches)^3. Scaled to [0,100].
MetricScore meteor(const Tokens& hypothesis, const Tokens& reference);

// Lightweight English suffix stripper used by the METEOR stem stage.
std::string light_stem(const std::string& word);

std::string metric_name(MetricKind kind);

}  // namespace cpr
