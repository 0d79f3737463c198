#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "backend.hpp"
#include "refine.hpp"

namespace cpr {

inline constexpr const char* kReportSchema = "cpr/report/v1";

struct ResponseRecord {
  std::string prompt_id;
  std::string condition;  // original | cpr_no_desc | cpr (free-form for external systems)
  std::string text;
};

struct ItemScores {
  std::string prompt_id;
  std::string condition;
  double hi = 0.0;
  double cqs = 0.0;
};

struct WinRateResult {
  double wr = 0.0;
  int wins = 0;
  int losses = 0;
  int ties = 0;
  int excluded = 0;  // judge verdicts that stayed unparsable
  std::vector<double> credits;
};

struct ConditionAggregate {
  double hi_mean = 0.0;
  double cqs_mean = 0.0;
  std::optional<double> wr;  // vs the "original" condition; absent for original itself
};

struct EvalReport {
  std::vector<ItemScores> per_item;
  std::map<std::string, ConditionAggregate> aggregates;
  std::optional<std::string> bucket;  // "low" | "high" when bucketed
};

double score_hi(const std::string& response, const std::string& prompt, const LmClient& judge);
double score_cqs(const std::string& response, const std::string& prompt, const LmClient& judge);

struct DescriptionScores {
  double relevance = 0.0;
  double coherence = 0.0;
};
DescriptionScores score_description(const std::string& description,
                                    const std::string& refined_prompt, const LmClient& judge);

struct JudgedPair {
  std::string response_a;
  std::string response_b;
  std::string prompt;
};
// Tie credit is 0.5; with position_debias each pair is judged both ways and
// the two verdicts averaged.
WinRateResult win_rate(const std::vector<JudgedPair>& pairs, const LmClient& judge,
                       bool position_debias);

// Partition at well_formedness 0.2; exactly 0.2 lands in "low".
std::pair<std::vector<PromptRecord>, std::vector<PromptRecord>> bucket_by_if(
    const std::vector<PromptRecord>& prompts);  // returns (low, high)

// Full judge protocol: HI/CQS per response, win rate of every non-original
// condition against "original" over prompts present in both.
EvalReport run_judge_eval(const std::vector<PromptRecord>& prompts,
                          const std::vector<ResponseRecord>& responses, const LmClient& judge,
                          bool position_debias, int parallelism = 1);

std::vector<ResponseRecord> read_response_jsonl(const std::string& path);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
std::string render_report_table(const EvalReport& report);

}  // namespace cpr
