// cpr command-line tool. Everything goes through the public C API in cpr.h.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpr.h"

namespace {

struct EngineHandle {
  cpr_engine* ptr = nullptr;
  ~EngineHandle() { cpr_engine_free(ptr); }
};

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;  // raw key=value overrides
  std::string backend;            // shorthand for backend.base_url (all stages)
  std::string model;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (key=value with [sections])");
  cmd->add_option("--set", opts.sets, "Override a config key, e.g. --set describe.temperature=0.5");
  cmd->add_option("--backend", opts.backend,
                  "Backend base URL for all stages (http(s)://... or script:<path>)");
  cmd->add_option("--model", opts.model, "Model id for all stages");
  cmd->add_flag("--dry-run", opts.dry_run,
                "Print the merged config and planned actions; no backend calls");
}

int fail(cpr_engine* engine, cpr_status status) {
  std::fprintf(stderr, "cpr: error: %s\n", cpr_engine_last_error(engine));
  if (status == CPR_ERR_PARTIAL) return 2;
  if (status == CPR_ERR_USAGE) return 64;
  return 1;
}

int apply_set(cpr_engine* engine, const std::string& key, const std::string& value) {
  const cpr_status status = cpr_engine_set(engine, key.c_str(), value.c_str());
  if (status != CPR_OK) {
    std::fprintf(stderr, "cpr: bad option %s: %s\n", key.c_str(),
                 cpr_engine_last_error(engine));
    return 64;
  }
  return 0;
}

int make_engine(const CommonOpts& opts, EngineHandle& handle) {
  handle.ptr = cpr_engine_new(opts.config_path.empty() ? nullptr : opts.config_path.c_str());
  if (!opts.backend.empty()) {
    if (int rc = apply_set(handle.ptr, "backend.base_url", opts.backend)) return rc;
  }
  if (!opts.model.empty()) {
    if (int rc = apply_set(handle.ptr, "backend.model", opts.model)) return rc;
  }
  for (const auto& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "cpr: --set expects key=value, got '%s'\n", kv.c_str());
      return 64;
    }
    if (int rc = apply_set(handle.ptr, kv.substr(0, eq), kv.substr(eq + 1))) return rc;
  }
  return 0;
}

int dump_dry_run(cpr_engine* engine, const std::string& plan) {
  char* json = nullptr;
  const cpr_status status = cpr_engine_dump_config(engine, &json);
  if (status != CPR_OK) return fail(engine, status);
  std::printf("%s\n", json);
  cpr_string_free(json);
  std::printf("planned: %s (no backend calls made)\n", plan.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curative prompt refinement engine"};
  app.require_subcommand(0, 1);

  bool show_version = false;
  app.add_flag("--version", show_version, "Print version and emitted schema versions");

  // refine
  CommonOpts refine_opts;
  std::string refine_in, refine_out;
  double ppl_threshold = -1;
  int top_k = -1, max_descriptions = -1, parallelism = -1;
  bool degrade = false;
  auto* refine_cmd = app.add_subcommand("refine", "Refine a JSONL file of prompts");
  refine_cmd->add_option("--in", refine_in, "Input prompts JSONL")->required();
  refine_cmd->add_option("--out", refine_out, "Output refined JSONL")->required();
  refine_cmd->add_option("--ppl-threshold", ppl_threshold, "Perplexity threshold tau");
  refine_cmd->add_option("--top-k", top_k, "Descriptions kept after reranking (0 disables)");
  refine_cmd->add_option("--max-descriptions", max_descriptions, "Generation cap m");
  refine_cmd->add_option("--parallelism", parallelism, "Prompts in flight");
  refine_cmd->add_flag("--degrade", degrade,
                       "On describe-stage failure, emit the no-descriptions variant");
  add_common(refine_cmd, refine_opts);

  // dataset build
  CommonOpts dataset_opts;
  std::string ds_source, ds_in, ds_out;
  std::size_t ds_n = 10000;
  unsigned long long ds_seed = 0;
  bool ds_skip_bad = false;
  auto* dataset_cmd = app.add_subcommand("dataset", "Instruction-tuning dataset tools");
  auto* build_cmd = dataset_cmd->add_subcommand("build", "Build one dataset split");
  build_cmd->add_option("--source", ds_source, "wikien | mqr | wikid")->required();
  build_cmd->add_option("--in", ds_in, "Corpus file")->required();
  build_cmd->add_option("--out", ds_out, "Output JSONL")->required();
  build_cmd->add_option("--n", ds_n, "Examples to build (wikien/wikid)");
  build_cmd->add_option("--seed", ds_seed, "Corruption seed (wikien)");
  build_cmd->add_flag("--skip-bad", ds_skip_bad, "Skip malformed corpus rows instead of failing");
  add_common(build_cmd, dataset_opts);

  // eval lexical / judge
  CommonOpts lex_opts, judge_opts;
  std::string lex_pred, lex_ref, lex_report;
  std::string judge_prompts, judge_responses, judge_report;
  bool bucket_by_if = false, position_debias = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation harness");
  auto* lex_cmd = eval_cmd->add_subcommand("lexical", "BLEU/ROUGE/METEOR over prediction pairs");
  lex_cmd->add_option("--pred", lex_pred, "Predictions JSONL ({id,text})")->required();
  lex_cmd->add_option("--ref", lex_ref, "References JSONL ({id,text})")->required();
  lex_cmd->add_option("--report", lex_report, "Report output path")->required();
  add_common(lex_cmd, lex_opts);
  auto* judge_cmd = eval_cmd->add_subcommand("judge", "HI/CQS/WR via an LLM judge");
  judge_cmd->add_option("--prompts", judge_prompts, "Prompts JSONL")->required();
  judge_cmd->add_option("--responses", judge_responses, "Responses JSONL ({prompt_id,condition,text})")
      ->required();
  judge_cmd->add_option("--report", judge_report, "Report output path")->required();
  judge_cmd->add_flag("--bucket-by-if", bucket_by_if, "Split report by ill-formedness degree");
  judge_cmd->add_flag("--position-debias", position_debias,
                      "Judge each pair twice with order swapped");
  add_common(judge_cmd, judge_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  if (show_version) {
    std::printf("cpr %s\nschemas: %s\n", cpr_version(), cpr_schema_versions());
    return 0;
  }

  if (refine_cmd->parsed()) {
    EngineHandle engine;
    if (int rc = make_engine(refine_opts, engine)) return rc;
    if (ppl_threshold >= 0 &&
        apply_set(engine.ptr, "ppl_threshold", std::to_string(ppl_threshold)))
      return 64;
    if (top_k >= 0 && apply_set(engine.ptr, "top_k", std::to_string(top_k))) return 64;
    if (max_descriptions > 0 &&
        apply_set(engine.ptr, "max_descriptions", std::to_string(max_descriptions)))
      return 64;
    if (parallelism > 0 && apply_set(engine.ptr, "parallelism", std::to_string(parallelism)))
      return 64;
    if (degrade && apply_set(engine.ptr, "degrade", "true")) return 64;
    if (refine_opts.dry_run) {
      return dump_dry_run(engine.ptr, "refine " + refine_in + " -> " + refine_out);
    }
    int ok = 0, failed = 0;
    const cpr_status status =
        cpr_refine_file(engine.ptr, refine_in.c_str(), refine_out.c_str(), &ok, &failed);
    if (status != CPR_OK) return fail(engine.ptr, status);
    std::printf("refined %d prompts -> %s\n", ok, refine_out.c_str());
    return 0;
  }

  if (build_cmd->parsed()) {
    EngineHandle engine;
    if (int rc = make_engine(dataset_opts, engine)) return rc;
    if (dataset_opts.dry_run) {
      return dump_dry_run(engine.ptr, "dataset build --source " + ds_source + " " + ds_in +
                                          " -> " + ds_out);
    }
    const cpr_status status = cpr_dataset_build(engine.ptr, ds_source.c_str(), ds_in.c_str(),
                                                ds_out.c_str(), ds_n, ds_seed, ds_skip_bad);
    if (status != CPR_OK) return fail(engine.ptr, status);
    std::printf("dataset written to %s\n", ds_out.c_str());
    return 0;
  }

  if (lex_cmd->parsed()) {
    EngineHandle engine;
    if (int rc = make_engine(lex_opts, engine)) return rc;
    if (lex_opts.dry_run) {
      return dump_dry_run(engine.ptr, "eval lexical " + lex_pred + " vs " + lex_ref);
    }
    const cpr_status status =
        cpr_eval_lexical(engine.ptr, lex_pred.c_str(), lex_ref.c_str(), lex_report.c_str());
    if (status != CPR_OK) return fail(engine.ptr, status);
    std::printf("lexical report written to %s\n", lex_report.c_str());
    return 0;
  }

  if (judge_cmd->parsed()) {
    EngineHandle engine;
    if (int rc = make_engine(judge_opts, engine)) return rc;
    if (position_debias && apply_set(engine.ptr, "position_debias", "true")) return 64;
    if (judge_opts.dry_run) {
      return dump_dry_run(engine.ptr, "eval judge " + judge_responses + " against " +
                                          judge_prompts);
    }
    char* table = nullptr;
    const cpr_status status =
        cpr_eval_judge(engine.ptr, judge_prompts.c_str(), judge_responses.c_str(),
                       judge_report.c_str(), bucket_by_if ? 1 : 0, &table);
    if (status != CPR_OK) return fail(engine.ptr, status);
    std::printf("%s", table);
    cpr_string_free(table);
    std::printf("judge report written to %s\n", judge_report.c_str());
    return 0;
  }

  std::fprintf(stderr, "%s", app.help().c_str());
  return 64;
}
