#pragma once

#include <map>
#include <string>

#include "backend.hpp"
#include "compose.hpp"
#include "eval.hpp"

namespace cpr {

// Merged runtime configuration: built-in defaults, overlaid by a flat
// key-value config file with [section] headers, overlaid by explicit
// overrides (CLI flags).
struct EngineConfig {
  BackendConfig refine_backend;
  BackendConfig describe_backend;
  BackendConfig judge_backend;
  DescribeParams describe;
  Layout layout = Layout::context_then_question;
  int parallelism = 4;
  bool degrade = false;
  bool enable_descriptions = true;
  bool include_timings = false;
  bool position_debias = false;
  std::string prompts_dir;

  static EngineConfig defaults();
  static EngineConfig load(const std::string& config_path,
                           const std::map<std::string, std::string>& overrides);

  // Applies one "key=value" pair; keys use "section.field" or bare global
  // names (e.g. "refine.base_url", "ppl_threshold", "top_k").
  void set(const std::string& key, const std::string& value);

  void validate() const;
  // Full merged view, api keys redacted. Includes the fixed bucket boundary.
  std::string dump_json() const;
};

struct RefineFileStats {
  int ok = 0;
  int failed = 0;
};

class Engine {
 public:
  explicit Engine(EngineConfig config);

  const EngineConfig& config() const { return config_; }

  RefinedPrompt refine_one(const PromptRecord& prompt) const;
  RefineFileStats refine_file(const std::string& in_path, const std::string& out_path) const;

  void dataset_build(const std::string& source, const std::string& in_path,
                     const std::string& out_path, std::size_t n, std::uint64_t seed,
                     bool skip_bad) const;

  // Matches prediction and reference lines ({"id","text"} JSONL) by id and
  // writes a cpr/lexical/v1 report.
  void eval_lexical(const std::string& pred_path, const std::string& ref_path,
                    const std::string& report_path) const;

  // Runs the judge protocol; with bucket_by_if, emits one report per bucket
  // under {"schema":"cpr/report_set/v1","reports":[...]}.
  std::string eval_judge(const std::string& prompts_path, const std::string& responses_path,
                         const std::string& report_path, bool bucket) const;

  const LmClient& judge_client() const { return judge_client_; }

 private:
  EngineConfig config_;
  TemplateStore templates_;
  LmClient refine_client_;
  LmClient describe_client_;
  LmClient judge_client_;
};

std::string schema_versions_json();

}  // namespace cpr
