#pragma once

#include <memory>
#include <string>
#include <vector>

#include "templates.hpp"

namespace cpr {

struct BackendConfig {
  std::string base_url;                    // http(s)://... or script:<path>
  std::string model_id = "default";
  std::string api_key_env = "CPR_API_KEY"; // env var consulted when api_key empty
  std::string api_key;                     // inline secret, optional
  int timeout_ms = 30000;
  int max_retries = 3;
  double temperature = 0.0;
  int max_tokens = 512;
  int backoff_base_ms = 200;

  // Throws InvalidConfigError on violation.
  void validate() const;
  bool is_scripted() const { return base_url.rfind("script:", 0) == 0; }
};

struct TokenLogprob {
  std::string text;
  double logprob = 0.0;
};

enum class FinishReason { stop, length, error };

struct ScoredGeneration {
  std::string text;
  std::vector<TokenLogprob> tokens;
  FinishReason finish_reason = FinishReason::stop;

  std::vector<double> logprobs() const;
};

struct HttpResult {
  int status = 0;
  std::string body;
};

// Transport for one chat-completions exchange. Implementations throw
// TransportError on connection-level failure.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResult post_chat(const BackendConfig& config, const std::string& body) = 0;
};

// Deterministic replay transport. A script is an ordered list of rules; the
// first rule whose `match` substring occurs in the user message handles the
// call. Each rule carries a response sequence consumed by a per-rule counter
// (the final entry repeats once exhausted), so concurrent callers hitting
// different rules stay deterministic.
//
// Rule response forms:
//   {"text": "...", "logprobs": [...], "finish_reason": "stop"}  -> 200, synthesized body
//   {"raw": {...}}                                               -> 200, verbatim body
//   {"status": 429, "body": "..."}                               -> that HTTP status
//   {"error": "connect"}                                         -> TransportError
// Any form may add "delay_ms" for latency injection.
class ScriptTransport : public Transport {
 public:
  static std::shared_ptr<ScriptTransport> from_file(const std::string& path);
  static std::shared_ptr<ScriptTransport> from_json(const std::string& script_json);

  HttpResult post_chat(const BackendConfig& config, const std::string& body) override;

  int total_calls() const;
  int max_in_flight() const;
  // Serialized request bodies in arrival order.
  std::vector<std::string> request_log() const;

  ~ScriptTransport() override;

 private:
  ScriptTransport();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::shared_ptr<Transport> make_transport(const BackendConfig& config);

// Protocol client over a transport: request serialization, retry schedule,
// response parsing, judge verdict extraction.
class LmClient {
 public:
  explicit LmClient(BackendConfig config);
  LmClient(BackendConfig config, std::shared_ptr<Transport> transport);

  ScoredGeneration generate(const std::string& system_prompt,
                            const std::string& user_prompt) const;

  // rubric_name must be a registered rubric asset; returns a scalar in [0,1].
  // Pairwise verdicts map A -> 1.0, B -> 0.0, tie -> 0.5.
  double judge(const std::string& rubric_name, const std::string& payload) const;

  const BackendConfig& config() const { return config_; }
  const std::shared_ptr<Transport>& transport() const { return transport_; }
  void set_template_store(TemplateStore store) { templates_ = std::move(store); }

  // Byte-stable serialized request body for the given inputs.
  static std::string request_body(const BackendConfig& config, const std::string& system_prompt,
                                  const std::string& user_prompt);

 private:
  ScoredGeneration call_once(const std::string& body) const;

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  TemplateStore templates_;
};

// Extracts "SCORE: <x>" from judge output; empty optional when absent or out of range.
// Exposed for tests.
bool parse_judge_scalar(const std::string& text, double* out);
bool parse_judge_verdict(const std::string& text, double* out);

}  // namespace cpr
