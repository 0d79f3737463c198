/* cpr — curative prompt refinement engine, C API.
 *
 * Handles are opaque; every call that can fail returns a cpr_status and
 * leaves a message retrievable via cpr_engine_last_error(). Strings returned
 * through char** are heap-allocated and must be released with
 * cpr_string_free().
 */
#ifndef CPR_H
#define CPR_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpr_status {
  CPR_OK = 0,
  CPR_ERR_USAGE = 1,
  CPR_ERR_IO = 2,
  CPR_ERR_TRANSPORT = 3,
  CPR_ERR_PROTOCOL = 4,
  CPR_ERR_AUTH = 5,
  CPR_ERR_JUDGE_PARSE = 6,
  CPR_ERR_EMPTY_INPUT = 7,
  CPR_ERR_INVALID_CONFIG = 8,
  CPR_ERR_PARTIAL = 9,
  CPR_ERR_INTERNAL = 10
} cpr_status;

typedef struct cpr_engine cpr_engine;

const char* cpr_version(void);
/* JSON map of every emitted file schema version. */
const char* cpr_schema_versions(void);

/* config_path may be NULL (built-in defaults). The engine is initialized
 * lazily on first use; cpr_engine_set() overrides keys until then. */
cpr_engine* cpr_engine_new(const char* config_path);
cpr_status cpr_engine_set(cpr_engine* engine, const char* key, const char* value);
void cpr_engine_free(cpr_engine* engine);
const char* cpr_engine_last_error(const cpr_engine* engine);

/* Merged configuration as pretty JSON (api keys redacted). */
cpr_status cpr_engine_dump_config(cpr_engine* engine, char** out_json);

/* Refine a JSONL file of prompt records. n_ok/n_failed may be NULL. */
cpr_status cpr_refine_file(cpr_engine* engine, const char* in_path, const char* out_path,
                           int* n_ok, int* n_failed);
/* Refine one prompt; the result record is returned as JSON. */
cpr_status cpr_refine_prompt(cpr_engine* engine, const char* id, const char* raw_text,
                             char** out_json);

/* source: "wikien" | "mqr" | "wikid". n is ignored for mqr. */
cpr_status cpr_dataset_build(cpr_engine* engine, const char* source, const char* in_path,
                             const char* out_path, size_t n, unsigned long long seed,
                             int skip_bad);

cpr_status cpr_eval_lexical(cpr_engine* engine, const char* pred_path, const char* ref_path,
                            const char* report_path);
/* bucket != 0 splits the report by ill-formedness degree at 0.2. out_table
 * (optional) receives a rendered summary table. */
cpr_status cpr_eval_judge(cpr_engine* engine, const char* prompts_path,
                          const char* responses_path, const char* report_path, int bucket,
                          char** out_table);

/* Stateless helpers. */
cpr_status cpr_ppl(const double* logprobs, size_t count, double* out_value);
/* metric: "bleu" | "rouge_1" | "rouge_2" | "rouge_l" | "meteor"; texts are
 * tokenized with the library tokenizer; value lands in [0,100]. */
cpr_status cpr_metric(const char* metric, const char* hypothesis, const char* reference,
                      double* out_value);

void cpr_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CPR_H */
