#include "cpr.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <string>

#include "compose.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "perplexity.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

cpr_status status_of(cpr::ErrorCode code) {
  using cpr::ErrorCode;
  switch (code) {
    case ErrorCode::usage:
      return CPR_ERR_USAGE;
    case ErrorCode::io:
    case ErrorCode::insufficient_corpus:
    case ErrorCode::missing_score:
      return CPR_ERR_IO;
    case ErrorCode::transport:
      return CPR_ERR_TRANSPORT;
    case ErrorCode::protocol:
      return CPR_ERR_PROTOCOL;
    case ErrorCode::auth:
      return CPR_ERR_AUTH;
    case ErrorCode::judge_parse:
      return CPR_ERR_JUDGE_PARSE;
    case ErrorCode::empty_input:
    case ErrorCode::non_finite:
      return CPR_ERR_EMPTY_INPUT;
    case ErrorCode::partial_failure:
      return CPR_ERR_PARTIAL;
    case ErrorCode::invalid_config:
      return CPR_ERR_INVALID_CONFIG;
  }
  return CPR_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct cpr_engine {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::unique_ptr<cpr::Engine> engine;
  std::string last_error;

  cpr::Engine& get() {
    if (!engine) {
      engine = std::make_unique<cpr::Engine>(cpr::EngineConfig::load(config_path, overrides));
    }
    return *engine;
  }
};

namespace {

template <typename Fn>
cpr_status guarded(cpr_engine* engine, Fn&& fn) {
  if (!engine) return CPR_ERR_USAGE;
  try {
    fn(engine->get());
    engine->last_error.clear();
    return CPR_OK;
  } catch (const cpr::Error& e) {
    engine->last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return CPR_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* cpr_version(void) { return kVersion; }

const char* cpr_schema_versions(void) {
  static const std::string versions = cpr::schema_versions_json();
  return versions.c_str();
}

cpr_engine* cpr_engine_new(const char* config_path) {
  auto* e = new cpr_engine();
  if (config_path) e->config_path = config_path;
  return e;
}

void cpr_engine_free(cpr_engine* engine) { delete engine; }

const char* cpr_engine_last_error(const cpr_engine* engine) {
  return engine ? engine->last_error.c_str() : "";
}

cpr_status cpr_engine_set(cpr_engine* engine, const char* key, const char* value) {
  if (!engine || !key || !value) return CPR_ERR_USAGE;
  if (engine->engine) {
    engine->last_error = "engine already initialized; set options before first use";
    return CPR_ERR_USAGE;
  }
  try {
    // Probe against defaults so unknown keys and bad values fail at set time.
    cpr::EngineConfig probe = cpr::EngineConfig::defaults();
    probe.set(key, value);
  } catch (const cpr::Error& e) {
    engine->last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return CPR_ERR_INVALID_CONFIG;
  }
  engine->overrides[key] = value;
  return CPR_OK;
}

cpr_status cpr_engine_dump_config(cpr_engine* engine, char** out_json) {
  if (!engine || !out_json) return CPR_ERR_USAGE;
  try {
    const cpr::EngineConfig cfg =
        engine->engine ? engine->engine->config()
                       : cpr::EngineConfig::load(engine->config_path, engine->overrides);
    *out_json = dup_string(cfg.dump_json());
    return CPR_OK;
  } catch (const cpr::Error& e) {
    engine->last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return CPR_ERR_INTERNAL;
  }
}

cpr_status cpr_refine_file(cpr_engine* engine, const char* in_path, const char* out_path,
                           int* n_ok, int* n_failed) {
  if (!in_path || !out_path) return CPR_ERR_USAGE;
  return guarded(engine, [&](cpr::Engine& e) {
    const auto stats = e.refine_file(in_path, out_path);
    if (n_ok) *n_ok = stats.ok;
    if (n_failed) *n_failed = stats.failed;
    if (stats.failed > 0) {
      throw cpr::Error(cpr::ErrorCode::partial_failure,
                       std::to_string(stats.failed) + " of " +
                           std::to_string(stats.ok + stats.failed) + " prompts failed");
    }
  });
}

cpr_status cpr_refine_prompt(cpr_engine* engine, const char* id, const char* raw_text,
                             char** out_json) {
  if (!raw_text || !out_json) return CPR_ERR_USAGE;
  return guarded(engine, [&](cpr::Engine& e) {
    cpr::PromptRecord rec;
    rec.id = id ? id : "prompt-0";
    rec.raw_text = raw_text;
    const auto refined = e.refine_one(rec);
    *out_json = dup_string(cpr::refined_prompt_to_json(refined, e.config().include_timings));
  });
}

cpr_status cpr_dataset_build(cpr_engine* engine, const char* source, const char* in_path,
                             const char* out_path, size_t n, unsigned long long seed,
                             int skip_bad) {
  if (!source || !in_path || !out_path) return CPR_ERR_USAGE;
  return guarded(engine, [&](cpr::Engine& e) {
    e.dataset_build(source, in_path, out_path, n, seed, skip_bad != 0);
  });
}

cpr_status cpr_eval_lexical(cpr_engine* engine, const char* pred_path, const char* ref_path,
                            const char* report_path) {
  if (!pred_path || !ref_path || !report_path) return CPR_ERR_USAGE;
  return guarded(engine,
                 [&](cpr::Engine& e) { e.eval_lexical(pred_path, ref_path, report_path); });
}

cpr_status cpr_eval_judge(cpr_engine* engine, const char* prompts_path,
                          const char* responses_path, const char* report_path, int bucket,
                          char** out_table) {
  if (!prompts_path || !responses_path || !report_path) return CPR_ERR_USAGE;
  return guarded(engine, [&](cpr::Engine& e) {
    const std::string table = e.eval_judge(prompts_path, responses_path, report_path, bucket != 0);
    if (out_table) *out_table = dup_string(table);
  });
}

cpr_status cpr_ppl(const double* logprobs, size_t count, double* out_value) {
  if (!logprobs || !out_value) return CPR_ERR_USAGE;
  try {
    *out_value = cpr::ppl(std::span<const double>(logprobs, count)).value;
    return CPR_OK;
  } catch (const cpr::Error& e) {
    return status_of(e.code());
  }
}

cpr_status cpr_metric(const char* metric, const char* hypothesis, const char* reference,
                      double* out_value) {
  if (!metric || !hypothesis || !reference || !out_value) return CPR_ERR_USAGE;
  try {
    const auto hyp = cpr::tokenize(hypothesis);
    const auto ref = cpr::tokenize(reference);
    const std::string name = metric;
    cpr::MetricScore score;
    if (name == "bleu") {
      score = cpr::bleu(hyp, {ref});
    } else if (name == "rouge_1") {
      score = cpr::rouge(hyp, ref, cpr::MetricKind::rouge_1);
    } else if (name == "rouge_2") {
      score = cpr::rouge(hyp, ref, cpr::MetricKind::rouge_2);
    } else if (name == "rouge_l") {
      score = cpr::rouge(hyp, ref, cpr::MetricKind::rouge_l);
    } else if (name == "meteor") {
      score = cpr::meteor(hyp, ref);
    } else {
      return CPR_ERR_USAGE;
    }
    *out_value = score.value;
    return CPR_OK;
  } catch (const cpr::Error& e) {
    return status_of(e.code());
  }
}

void cpr_string_free(char* s) { std::free(s); }

}  // extern "C"
