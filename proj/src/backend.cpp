#include "backend.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"

#include <httplib.h>

namespace cpr {

using nlohmann::json;
using nlohmann::ordered_json;

void BackendConfig::validate() const {
  if (timeout_ms <= 0) throw InvalidConfigError("backend: timeout must be > 0");
  if (max_retries < 0 || max_retries > 10)
    throw InvalidConfigError("backend: max_retries must be in [0,10]");
  if (temperature < 0) throw InvalidConfigError("backend: temperature must be >= 0");
  if (max_tokens <= 0) throw InvalidConfigError("backend: max_tokens must be > 0");
  if (is_scripted()) {
    if (base_url.size() <= 7) throw InvalidConfigError("backend: script path missing");
    return;
  }
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    throw InvalidConfigError("backend: base_url must be absolute http(s) or script:<path>");
}

std::vector<double> ScoredGeneration::logprobs() const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.logprob);
  return out;
}

// ---------------------------------------------------------------------------
// Scripted transport

namespace {

struct ScriptResponse {
  json spec;
};

struct ScriptRule {
  std::string match;  // substring of the user message; empty matches all
  std::vector<ScriptResponse> responses;
  int cursor = 0;
};

std::string user_message_of(const std::string& body) {
  auto parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("messages")) return {};
  std::string user;
  for (const auto& m : parsed["messages"]) {
    if (m.value("role", "") == "user") user = m.value("content", "");
  }
  return user;
}

// Split text into n chunks whose concatenation is exactly text.
std::vector<std::string> split_even(const std::string& text, std::size_t n) {
  std::vector<std::string> out;
  if (n == 0) return out;
  const std::size_t base = text.size() / n, extra = text.size() % n;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out.push_back(text.substr(pos, len));
    pos += len;
  }
  return out;
}

json synthesize_completion(const json& spec) {
  const std::string text = spec.value("text", "");
  json token_entries = json::array();
  if (spec.contains("tokens")) {
    for (const auto& pair : spec["tokens"]) {
      token_entries.push_back({{"token", pair.at(0)}, {"logprob", pair.at(1)}});
    }
  } else if (spec.contains("logprobs")) {
    const auto& lps = spec["logprobs"];
    auto pieces = split_even(text, lps.size());
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      token_entries.push_back({{"token", pieces[i]}, {"logprob", lps[i]}});
    }
  }
  json choice = {{"message", {{"role", "assistant"}, {"content", text}}},
                 {"finish_reason", spec.value("finish_reason", "stop")}};
  if (!token_entries.empty() || spec.contains("logprobs") || spec.contains("tokens")) {
    choice["logprobs"] = {{"content", token_entries}};
  }
  return json{{"choices", json::array({choice})}};
}

}  // namespace

struct ScriptTransport::Impl {
  mutable std::mutex mu;
  std::vector<ScriptRule> rules;
  std::vector<std::string> requests;
  int calls = 0;
  int in_flight = 0;
  int max_in_flight = 0;
};

ScriptTransport::ScriptTransport() : impl_(std::make_unique<Impl>()) {}
ScriptTransport::~ScriptTransport() = default;

std::shared_ptr<ScriptTransport> ScriptTransport::from_json(const std::string& script_json) {
  auto parsed = json::parse(script_json, nullptr, false);
  if (parsed.is_discarded()) throw InvalidConfigError("script: invalid JSON");
  json rules;
  if (parsed.is_array()) {
    rules = parsed;
  } else if (parsed.contains("rules")) {
    rules = parsed["rules"];
  } else {
    // A bare response object acts as a single catch-all rule.
    rules = json::array({json{{"match", ""}, {"responses", json::array({parsed})}}});
  }
  auto t = std::shared_ptr<ScriptTransport>(new ScriptTransport());
  for (const auto& r : rules) {
    ScriptRule rule;
    rule.match = r.value("match", "");
    if (r.contains("responses")) {
      for (const auto& resp : r["responses"]) rule.responses.push_back({resp});
    } else {
      rule.responses.push_back({r});
    }
    if (rule.responses.empty()) throw InvalidConfigError("script: rule with no responses");
    t->impl_->rules.push_back(std::move(rule));
  }
  if (t->impl_->rules.empty()) throw InvalidConfigError("script: no rules");
  return t;
}

std::shared_ptr<ScriptTransport> ScriptTransport::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "script: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

HttpResult ScriptTransport::post_chat(const BackendConfig&, const std::string& body) {
  json spec;
  {
    std::lock_guard lock(impl_->mu);
    impl_->requests.push_back(body);
    ++impl_->calls;
    ++impl_->in_flight;
    impl_->max_in_flight = std::max(impl_->max_in_flight, impl_->in_flight);

    const std::string user = user_message_of(body);
    ScriptRule* rule = nullptr;
    for (auto& r : impl_->rules) {
      if (r.match.empty() || user.find(r.match) != std::string::npos) {
        rule = &r;
        break;
      }
    }
    if (!rule) {
      --impl_->in_flight;
      throw ProtocolError("script: no rule matches request");
    }
    const int idx = std::min<int>(rule->cursor, static_cast<int>(rule->responses.size()) - 1);
    ++rule->cursor;
    spec = rule->responses[static_cast<std::size_t>(idx)].spec;
  }

  if (spec.contains("delay_ms")) {
    std::this_thread::sleep_for(std::chrono::milliseconds(spec["delay_ms"].get<int>()));
  }

  struct InFlightGuard {
    Impl* impl;
    ~InFlightGuard() {
      std::lock_guard lock(impl->mu);
      --impl->in_flight;
    }
  } guard{impl_.get()};

  if (spec.contains("error")) {
    throw TransportError("script: injected " + spec["error"].get<std::string>());
  }
  if (spec.contains("status")) {
    return {spec["status"].get<int>(), spec.value("body", "")};
  }
  if (spec.contains("raw")) {
    return {200, spec["raw"].dump()};
  }
  return {200, synthesize_completion(spec).dump()};
}

int ScriptTransport::total_calls() const {
  std::lock_guard lock(impl_->mu);
  return impl_->calls;
}

int ScriptTransport::max_in_flight() const {
  std::lock_guard lock(impl_->mu);
  return impl_->max_in_flight;
}

std::vector<std::string> ScriptTransport::request_log() const {
  std::lock_guard lock(impl_->mu);
  return impl_->requests;
}

// ---------------------------------------------------------------------------
// HTTP transport

namespace {

class HttpTransport : public Transport {
 public:
  HttpResult post_chat(const BackendConfig& config, const std::string& body) override {
    std::string origin = config.base_url;
    std::string prefix;
    const auto scheme_end = origin.find("://");
    const auto path_start = origin.find('/', scheme_end + 3);
    if (path_start != std::string::npos) {
      prefix = origin.substr(path_start);
      origin = origin.substr(0, path_start);
      while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
    httplib::Client client(origin);
    client.set_connection_timeout(0, config.timeout_ms * 1000);
    client.set_read_timeout(0, config.timeout_ms * 1000);

    httplib::Headers headers;
    std::string key = config.api_key;
    if (key.empty() && !config.api_key_env.empty()) {
      if (const char* env = std::getenv(config.api_key_env.c_str())) key = env;
    }
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    auto res = client.Post(prefix + "/v1/chat/completions", headers, body, "application/json");
    if (!res) {
      throw TransportError("http: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_transport(const BackendConfig& config) {
  if (config.is_scripted()) {
    return ScriptTransport::from_file(config.base_url.substr(7));
  }
  return std::make_shared<HttpTransport>();
}

// ---------------------------------------------------------------------------
// Client

LmClient::LmClient(BackendConfig config) : LmClient(config, make_transport(config)) {}

LmClient::LmClient(BackendConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
}

std::string LmClient::request_body(const BackendConfig& config, const std::string& system_prompt,
                                   const std::string& user_prompt) {
  ordered_json body;
  body["model"] = config.model_id;
  body["messages"] = ordered_json::array();
  if (!system_prompt.empty()) {
    body["messages"].push_back({{"role", "system"}, {"content", system_prompt}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", user_prompt}});
  body["temperature"] = config.temperature;
  body["max_tokens"] = config.max_tokens;
  body["logprobs"] = true;
  return body.dump();
}

namespace {

HttpResult call_with_retries(Transport& transport, const BackendConfig& config,
                             const std::string& body) {
  std::string last_error = "unreachable";
  const int attempts = config.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::milliseconds(
          static_cast<long long>(config.backoff_base_ms) * (1LL << (attempt - 1)));
      std::this_thread::sleep_for(delay);
    }
    try {
      HttpResult res = transport.post_chat(config, body);
      if (res.status == 401 || res.status == 403) {
        throw AuthError("backend: HTTP " + std::to_string(res.status));
      }
      if (res.status == 429 || res.status >= 500) {
        last_error = "HTTP " + std::to_string(res.status);
        continue;
      }
      if (res.status != 200) {
        throw ProtocolError("backend: HTTP " + std::to_string(res.status));
      }
      return res;
    } catch (const TransportError& e) {
      last_error = e.what();
    }
  }
  throw TransportError("backend: giving up after " + std::to_string(attempts) +
                       " attempts: " + last_error);
}

ScoredGeneration parse_generation(const std::string& body) {
  auto parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) throw ProtocolError("backend: response is not JSON");
  if (!parsed.contains("choices") || parsed["choices"].empty()) {
    throw ProtocolError("backend: response has no choices");
  }
  const auto& choice = parsed["choices"][0];
  ScoredGeneration gen;
  if (!choice.contains("message") || !choice["message"].contains("content")) {
    throw ProtocolError("backend: choice has no message content");
  }
  gen.text = choice["message"]["content"].get<std::string>();
  const std::string finish = choice.value("finish_reason", "stop");
  gen.finish_reason = finish == "stop"     ? FinishReason::stop
                      : finish == "length" ? FinishReason::length
                                           : FinishReason::error;
  if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
      !choice["logprobs"].contains("content")) {
    throw ProtocolError("backend: response missing logprobs");
  }
  for (const auto& entry : choice["logprobs"]["content"]) {
    if (!entry.contains("logprob")) throw ProtocolError("backend: logprob entry malformed");
    TokenLogprob tok;
    tok.text = entry.value("token", "");
    tok.logprob = std::min(entry["logprob"].get<double>(), 0.0);
    gen.tokens.push_back(std::move(tok));
  }
  if (gen.finish_reason == FinishReason::stop && gen.tokens.empty()) {
    throw ProtocolError("backend: stop generation with empty token list");
  }
  std::string concat;
  for (const auto& t : gen.tokens) concat += t.text;
  if (!gen.tokens.empty() && concat != gen.text) {
    std::fprintf(stderr, "cpr: warning: token texts disagree with message text; using tokens\n");
    gen.text = concat;
  }
  return gen;
}

std::string parse_content_only(const std::string& body) {
  auto parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) throw ProtocolError("backend: response is not JSON");
  if (!parsed.contains("choices") || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("message")) {
    throw ProtocolError("backend: response has no message");
  }
  return parsed["choices"][0]["message"].value("content", "");
}

}  // namespace

ScoredGeneration LmClient::generate(const std::string& system_prompt,
                                    const std::string& user_prompt) const {
  if (user_prompt.empty()) throw EmptyInputError("generate: empty user prompt");
  const std::string body = request_body(config_, system_prompt, user_prompt);
  return parse_generation(call_with_retries(*transport_, config_, body).body);
}

bool parse_judge_scalar(const std::string& text, double* out) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  const auto pos = lower.find("score:");
  if (pos == std::string::npos) return false;
  try {
    std::size_t end = 0;
    const double v = std::stod(lower.substr(pos + 6), &end);
    if (v < 0.0 || v > 1.0) return false;
    *out = v;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_judge_verdict(const std::string& text, double* out) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  const auto pos = lower.find("verdict:");
  if (pos == std::string::npos) return false;
  auto rest = lower.substr(pos + 8);
  const auto first = rest.find_first_not_of(" \t");
  if (first == std::string::npos) return false;
  rest = rest.substr(first);
  if (rest.rfind("tie", 0) == 0) {
    *out = 0.5;
    return true;
  }
  if (rest[0] == 'a') {
    *out = 1.0;
    return true;
  }
  if (rest[0] == 'b') {
    *out = 0.0;
    return true;
  }
  return false;
}

double LmClient::judge(const std::string& rubric_name, const std::string& payload) const {
  if (!TemplateStore::is_known(rubric_name)) {
    throw InvalidConfigError("judge: unregistered rubric " + rubric_name);
  }
  const bool pairwise = rubric_name.find("pairwise") != std::string::npos;
  const std::string rubric = templates_.get(rubric_name);
  std::string user_prompt = TemplateStore::render(rubric, payload);

  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string body = request_body(config_, "", user_prompt);
    const std::string content =
        parse_content_only(call_with_retries(*transport_, config_, body).body);
    double value = 0.0;
    if (pairwise ? parse_judge_verdict(content, &value) : parse_judge_scalar(content, &value)) {
      return value;
    }
    // One reprompt restating the expected grammar.
    user_prompt += pairwise ? "\n\nReply with exactly one line: verdict: A, verdict: B, or "
                              "verdict: tie."
                            : "\n\nReply with exactly one line: SCORE: <value between 0 and 1>.";
  }
  throw JudgeParseError("judge: no parsable verdict after reprompt (rubric " + rubric_name + ")");
}

}  // namespace cpr
