#include "eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"

namespace cpr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string pair_payload(const std::string& label_a, const std::string& a,
                         const std::string& label_b, const std::string& b,
                         const std::string& prompt) {
  return "Prompt:\n" + prompt + "\n\nResponse " + label_a + ":\n" + a + "\n\nResponse " +
         label_b + ":\n" + b;
}

template <typename Fn>
void parallel_for(std::size_t count, int parallelism, Fn&& fn) {
  if (parallelism <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), count);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

double score_hi(const std::string& response, const std::string& prompt, const LmClient& judge) {
  return judge.judge(kRubricHi, "Prompt:\n" + prompt + "\n\nResponse:\n" + response);
}

double score_cqs(const std::string& response, const std::string& prompt, const LmClient& judge) {
  return judge.judge(kRubricCqs, "Prompt:\n" + prompt + "\n\nResponse:\n" + response);
}

DescriptionScores score_description(const std::string& description,
                                    const std::string& refined_prompt, const LmClient& judge) {
  const std::string payload =
      "Prompt:\n" + refined_prompt + "\n\nDescription:\n" + description;
  DescriptionScores out;
  out.relevance = judge.judge(kRubricRelevance, payload);
  out.coherence = judge.judge(kRubricCoherence, payload);
  return out;
}

WinRateResult win_rate(const std::vector<JudgedPair>& pairs, const LmClient& judge,
                       bool position_debias) {
  if (pairs.empty()) throw EmptyInputError("win_rate: no pairs");
  WinRateResult out;
  for (const auto& pair : pairs) {
    double credit = 0.0;
    try {
      const double forward = judge.judge(
          kRubricPairwise, pair_payload("A", pair.response_a, "B", pair.response_b, pair.prompt));
      if (position_debias) {
        const double backward = judge.judge(
            kRubricPairwise, pair_payload("A", pair.response_b, "B", pair.response_a, pair.prompt));
        credit = (forward + (1.0 - backward)) / 2.0;
      } else {
        credit = forward;
      }
    } catch (const JudgeParseError&) {
      ++out.excluded;
      continue;
    }
    out.credits.push_back(credit);
    if (credit == 1.0) {
      ++out.wins;
    } else if (credit == 0.0) {
      ++out.losses;
    } else {
      ++out.ties;
    }
  }
  if (!out.credits.empty()) {
    double sum = 0.0;
    for (double c : out.credits) sum += c;
    out.wr = sum / static_cast<double>(out.credits.size());
  }
  return out;
}

std::pair<std::vector<PromptRecord>, std::vector<PromptRecord>> bucket_by_if(
    const std::vector<PromptRecord>& prompts) {
  std::string missing;
  for (const auto& p : prompts) {
    if (!p.well_formedness) missing += (missing.empty() ? "" : ", ") + p.id;
  }
  if (!missing.empty()) {
    throw MissingScoreError("bucket_by_if: missing well_formedness for: " + missing);
  }
  std::pair<std::vector<PromptRecord>, std::vector<PromptRecord>> out;
  for (const auto& p : prompts) {
    if (*p.well_formedness < 0.2) {
      out.second.push_back(p);  // high ill-formedness
    } else {
      out.first.push_back(p);
    }
  }
  return out;
}

EvalReport run_judge_eval(const std::vector<PromptRecord>& prompts,
                          const std::vector<ResponseRecord>& responses, const LmClient& judge,
                          bool position_debias, int parallelism) {
  std::map<std::string, std::string> prompt_text;
  for (const auto& p : prompts) prompt_text[p.id] = p.raw_text;

  // condition -> prompt_id -> response text
  std::map<std::string, std::map<std::string, std::string>> by_condition;
  for (const auto& r : responses) {
    if (!prompt_text.count(r.prompt_id)) {
      throw Error(ErrorCode::io, "eval: response references unknown prompt " + r.prompt_id);
    }
    by_condition[r.condition][r.prompt_id] = r.text;
  }

  EvalReport report;
  report.per_item.resize(responses.size());
  std::vector<std::string> item_errors(responses.size());
  parallel_for(responses.size(), parallelism, [&](std::size_t i) {
    const auto& r = responses[i];
    ItemScores item;
    item.prompt_id = r.prompt_id;
    item.condition = r.condition;
    try {
      item.hi = score_hi(r.text, prompt_text.at(r.prompt_id), judge);
      item.cqs = score_cqs(r.text, prompt_text.at(r.prompt_id), judge);
    } catch (const JudgeParseError& e) {
      item_errors[i] = "item " + r.prompt_id + "/" + r.condition + ": " + e.what();
    }
    report.per_item[i] = std::move(item);
  });
  for (const auto& err : item_errors) {
    if (!err.empty()) throw JudgeParseError(err);
  }

  std::stable_sort(report.per_item.begin(), report.per_item.end(),
                   [](const ItemScores& a, const ItemScores& b) {
                     return std::tie(a.condition, a.prompt_id) < std::tie(b.condition, b.prompt_id);
                   });

  for (const auto& [condition, items] : by_condition) {
    ConditionAggregate agg;
    double hi_sum = 0.0, cqs_sum = 0.0;
    int count = 0;
    for (const auto& item : report.per_item) {
      if (item.condition != condition) continue;
      hi_sum += item.hi;
      cqs_sum += item.cqs;
      ++count;
    }
    if (count > 0) {
      agg.hi_mean = hi_sum / count;
      agg.cqs_mean = cqs_sum / count;
    }
    if (condition != "original" && by_condition.count("original")) {
      std::vector<JudgedPair> pairs;
      for (const auto& [pid, text] : items) {
        auto it = by_condition["original"].find(pid);
        if (it != by_condition["original"].end()) {
          pairs.push_back(JudgedPair{text, it->second, prompt_text.at(pid)});
        }
      }
      if (!pairs.empty()) {
        agg.wr = win_rate(pairs, judge, position_debias).wr;
      }
    }
    report.aggregates[condition] = agg;
  }
  return report;
}

std::vector<ResponseRecord> read_response_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<ResponseRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("prompt_id") || !parsed.contains("condition") ||
        !parsed.contains("text")) {
      throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) +
                                     ": expected {prompt_id, condition, text}");
    }
    out.push_back(ResponseRecord{parsed["prompt_id"].get<std::string>(),
                                 parsed["condition"].get<std::string>(),
                                 parsed["text"].get<std::string>()});
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["schema"] = kReportSchema;
  if (report.bucket) j["bucket"] = *report.bucket;
  ordered_json items = ordered_json::array();
  for (const auto& item : report.per_item) {
    items.push_back({{"prompt_id", item.prompt_id},
                     {"condition", item.condition},
                     {"hi", item.hi},
                     {"cqs", item.cqs}});
  }
  j["per_item"] = items;
  ordered_json aggs = ordered_json::object();
  for (const auto& [condition, agg] : report.aggregates) {
    ordered_json a = {{"hi_mean", agg.hi_mean}, {"cqs_mean", agg.cqs_mean}};
    if (agg.wr) a["wr"] = *agg.wr;
    aggs[condition] = a;
  }
  j["aggregates"] = aggs;
  return j.dump();
}

EvalReport report_from_json(const std::string& text) {
  auto parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded() || parsed.value("schema", "") != kReportSchema) {
    throw Error(ErrorCode::io, "report: invalid or wrong-schema JSON");
  }
  EvalReport report;
  if (parsed.contains("bucket")) report.bucket = parsed["bucket"].get<std::string>();
  for (const auto& item : parsed.at("per_item")) {
    report.per_item.push_back(ItemScores{item.at("prompt_id").get<std::string>(),
                                         item.at("condition").get<std::string>(),
                                         item.at("hi").get<double>(),
                                         item.at("cqs").get<double>()});
  }
  for (const auto& [condition, a] : parsed.at("aggregates").items()) {
    ConditionAggregate agg;
    agg.hi_mean = a.at("hi_mean").get<double>();
    agg.cqs_mean = a.at("cqs_mean").get<double>();
    if (a.contains("wr")) agg.wr = a["wr"].get<double>();
    report.aggregates[condition] = agg;
  }
  return report;
}

std::string render_report_table(const EvalReport& report) {
  std::ostringstream out;
  if (report.bucket) out << "IF bucket: " << *report.bucket << "\n";
  out << "Condition        HI (down)  CQS (up)   WR (up)\n";
  out << "-----------------------------------------------\n";
  for (const auto& [condition, agg] : report.aggregates) {
    char line[128];
    if (agg.wr) {
      std::snprintf(line, sizeof(line), "%-16s %-10.3f %-10.3f %.3f\n", condition.c_str(),
                    agg.hi_mean, agg.cqs_mean, *agg.wr);
    } else {
      std::snprintf(line, sizeof(line), "%-16s %-10.3f %-10.3f -\n", condition.c_str(),
                    agg.hi_mean, agg.cqs_mean);
    }
    out << line;
  }
  return out.str();
}

}  // namespace cpr
