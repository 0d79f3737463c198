#include "engine.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dataset.hpp"
#include "errors.hpp"
#include "metrics.hpp"

namespace cpr {

using nlohmann::json;
using nlohmann::ordered_json;

EngineConfig EngineConfig::defaults() {
  EngineConfig cfg;
  cfg.refine_backend.temperature = 0.0;
  cfg.describe_backend.temperature = 0.7;  // candidate diversity
  cfg.judge_backend.temperature = 0.0;
  return cfg;
}

namespace {

std::string trim_copy(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidConfigError("config: expected boolean, got '" + v + "'");
}

void set_backend_field(BackendConfig& backend, const std::string& field,
                       const std::string& value) {
  if (field == "base_url") {
    backend.base_url = value;
  } else if (field == "model" || field == "model_id") {
    backend.model_id = value;
  } else if (field == "api_key_env") {
    backend.api_key_env = value;
  } else if (field == "api_key") {
    backend.api_key = value;
  } else if (field == "timeout_ms") {
    backend.timeout_ms = std::stoi(value);
  } else if (field == "max_retries") {
    backend.max_retries = std::stoi(value);
  } else if (field == "temperature") {
    backend.temperature = std::stod(value);
  } else if (field == "max_tokens") {
    backend.max_tokens = std::stoi(value);
  } else if (field == "backoff_base_ms") {
    backend.backoff_base_ms = std::stoi(value);
  } else {
    throw InvalidConfigError("config: unknown backend field '" + field + "'");
  }
}

}  // namespace

void EngineConfig::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    const std::string section = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    if (section == "refine" || section == "backend") {
      set_backend_field(refine_backend, field, value);
      if (section == "backend") {  // [backend] configures all three at once
        set_backend_field(describe_backend, field, value);
        set_backend_field(judge_backend, field, value);
      }
    } else if (section == "describe") {
      set_backend_field(describe_backend, field, value);
    } else if (section == "judge") {
      set_backend_field(judge_backend, field, value);
    } else {
      throw InvalidConfigError("config: unknown section '" + section + "'");
    }
    return;
  }
  if (key == "max_descriptions") {
    describe.max_descriptions = std::stoi(value);
  } else if (key == "ppl_threshold") {
    describe.ppl_threshold = std::stod(value);
  } else if (key == "top_k") {
    const int k = std::stoi(value);
    if (k == 0) {
      enable_descriptions = false;  // "without descriptions" mode
    } else {
      describe.top_k = k;
    }
  } else if (key == "dedup") {
    describe.dedup = parse_bool(value);
  } else if (key == "layout") {
    if (value == "context_then_question") {
      layout = Layout::context_then_question;
    } else if (value == "question_then_context") {
      layout = Layout::question_then_context;
    } else {
      throw InvalidConfigError("config: unknown layout '" + value + "'");
    }
  } else if (key == "parallelism") {
    parallelism = std::stoi(value);
  } else if (key == "degrade") {
    degrade = parse_bool(value);
  } else if (key == "include_timings") {
    include_timings = parse_bool(value);
  } else if (key == "position_debias") {
    position_debias = parse_bool(value);
  } else if (key == "prompts_dir") {
    prompts_dir = value;
  } else {
    throw InvalidConfigError("config: unknown key '" + key + "'");
  }
}

EngineConfig EngineConfig::load(const std::string& config_path,
                                const std::map<std::string, std::string>& overrides) {
  EngineConfig cfg = defaults();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::io, "config: cannot open " + config_path);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim_copy(line);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim_copy(line.substr(1, line.size() - 2));
        // "[backend.refine]" and "[refine]" both name the refine backend
        if (section.rfind("backend.", 0) == 0) section = section.substr(8);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw InvalidConfigError("config: " + config_path + ":" + std::to_string(lineno) +
                                 ": expected key=value");
      }
      const std::string key = trim_copy(line.substr(0, eq));
      const std::string value = trim_copy(line.substr(eq + 1));
      try {
        cfg.set(section.empty() ? key : section + "." + key, value);
      } catch (const Error& e) {
        throw InvalidConfigError(config_path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  for (const auto& [key, value] : overrides) {
    cfg.set(key, value);
  }
  return cfg;
}

void EngineConfig::validate() const {
  refine_backend.validate();
  describe_backend.validate();
  judge_backend.validate();
  describe.validate();
  if (parallelism < 1) throw InvalidConfigError("config: parallelism must be >= 1");
}

namespace {

ordered_json backend_to_json(const BackendConfig& b) {
  return ordered_json{{"base_url", b.base_url},
                      {"model", b.model_id},
                      {"api_key_env", b.api_key_env},
                      {"api_key", b.api_key.empty() ? "" : "<redacted>"},
                      {"timeout_ms", b.timeout_ms},
                      {"max_retries", b.max_retries},
                      {"temperature", b.temperature},
                      {"max_tokens", b.max_tokens}};
}

}  // namespace

std::string EngineConfig::dump_json() const {
  ordered_json j;
  j["refine"] = backend_to_json(refine_backend);
  j["describe"] = backend_to_json(describe_backend);
  j["judge"] = backend_to_json(judge_backend);
  j["max_descriptions"] = describe.max_descriptions;
  j["ppl_threshold"] = describe.ppl_threshold;
  j["top_k"] = enable_descriptions ? describe.top_k : 0;
  j["dedup"] = describe.dedup;
  j["layout"] =
      layout == Layout::context_then_question ? "context_then_question" : "question_then_context";
  j["parallelism"] = parallelism;
  j["degrade"] = degrade;
  j["position_debias"] = position_debias;
  j["include_timings"] = include_timings;
  j["prompts_dir"] = prompts_dir;
  j["bucket_boundary"] = 0.2;
  return j.dump(2);
}

Engine::Engine(EngineConfig config)
    : config_(std::move(config)),
      templates_(config_.prompts_dir),
      refine_client_(config_.refine_backend),
      describe_client_(config_.describe_backend),
      judge_client_(config_.judge_backend) {
  config_.validate();
  judge_client_.set_template_store(templates_);
}

RefinedPrompt Engine::refine_one(const PromptRecord& prompt) const {
  PipelineOptions options;
  options.describe = config_.describe;
  options.layout = config_.layout;
  options.enable_descriptions = config_.enable_descriptions;
  options.degrade = config_.degrade;
  return run_pipeline(prompt, options, refine_client_, describe_client_, templates_);
}

RefineFileStats Engine::refine_file(const std::string& in_path,
                                    const std::string& out_path) const {
  const auto prompts = read_prompt_jsonl(in_path);
  PipelineOptions options;
  options.describe = config_.describe;
  options.layout = config_.layout;
  options.enable_descriptions = config_.enable_descriptions;
  options.degrade = config_.degrade;
  const auto items = run_batch(prompts, options, refine_client_, describe_client_,
                               config_.parallelism, templates_);

  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + out_path);
  RefineFileStats stats;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out << batch_item_to_json(prompts[i], items[i], config_.include_timings) << '\n';
    if (items[i].result) {
      ++stats.ok;
    } else {
      ++stats.failed;
    }
  }
  return stats;
}

void Engine::dataset_build(const std::string& source, const std::string& in_path,
                           const std::string& out_path, std::size_t n, std::uint64_t seed,
                           bool skip_bad) const {
  std::vector<InstructionExample> examples;
  std::vector<std::string> errors;
  if (source == "wikien") {
    CorruptionSpec spec;
    spec.seed = seed;
    examples = build_wikien(read_lines(in_path), spec, n);
  } else if (source == "mqr") {
    examples = build_mqr(read_mqr_tsv(in_path, skip_bad, &errors));
  } else if (source == "wikid") {
    examples = build_wikid(read_wikid_tsv(in_path, skip_bad, &errors), n);
  } else {
    throw InvalidConfigError("dataset: unknown source '" + source + "'");
  }
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + out_path);
  out << emit_jsonl(examples);
}

namespace {

std::map<std::string, std::string> read_id_text_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("id") || !parsed.contains("text")) {
      throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) + ": expected {id, text}");
    }
    out[parsed["id"].get<std::string>()] = parsed["text"].get<std::string>();
  }
  return out;
}

}  // namespace

void Engine::eval_lexical(const std::string& pred_path, const std::string& ref_path,
                          const std::string& report_path) const {
  const auto preds = read_id_text_jsonl(pred_path);
  const auto refs = read_id_text_jsonl(ref_path);

  ordered_json per_item = ordered_json::array();
  std::map<std::string, double> sums;
  int count = 0;
  for (const auto& [id, pred] : preds) {
    auto it = refs.find(id);
    if (it == refs.end()) {
      throw Error(ErrorCode::io, "eval lexical: no reference for id " + id);
    }
    const auto hyp = tokenize(pred);
    const auto ref = tokenize(it->second);
    const MetricScore scores[] = {
        bleu(hyp, {ref}),
        rouge(hyp, ref, MetricKind::rouge_1),
        rouge(hyp, ref, MetricKind::rouge_2),
        rouge(hyp, ref, MetricKind::rouge_l),
        meteor(hyp, ref),
    };
    ordered_json item;
    item["id"] = id;
    for (const auto& s : scores) {
      item[metric_name(s.metric)] = s.value;
      sums[metric_name(s.metric)] += s.value;
    }
    per_item.push_back(item);
    ++count;
  }
  if (count == 0) throw EmptyInputError("eval lexical: no predictions");

  ordered_json j;
  j["schema"] = "cpr/lexical/v1";
  j["per_item"] = per_item;
  ordered_json means = ordered_json::object();
  for (const auto& [name, sum] : sums) means[name] = sum / count;
  j["means"] = means;

  std::ofstream out(report_path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + report_path);
  out << j.dump(2) << '\n';
}

std::string Engine::eval_judge(const std::string& prompts_path, const std::string& responses_path,
                               const std::string& report_path, bool bucket) const {
  const auto prompts = read_prompt_jsonl(prompts_path);
  const auto responses = read_response_jsonl(responses_path);

  std::string table;
  ordered_json out_json;
  if (!bucket) {
    EvalReport report = run_judge_eval(prompts, responses, judge_client_,
                                       config_.position_debias, config_.parallelism);
    out_json = ordered_json::parse(report_to_json(report));
    table = render_report_table(report);
  } else {
    auto [low, high] = bucket_by_if(prompts);
    ordered_json reports = ordered_json::array();
    for (const auto& [name, subset] :
         {std::pair{std::string("low"), low}, std::pair{std::string("high"), high}}) {
      std::map<std::string, bool> ids;
      for (const auto& p : subset) ids[p.id] = true;
      std::vector<ResponseRecord> sub_responses;
      for (const auto& r : responses) {
        if (ids.count(r.prompt_id)) sub_responses.push_back(r);
      }
      if (subset.empty() || sub_responses.empty()) continue;
      EvalReport report = run_judge_eval(subset, sub_responses, judge_client_,
                                         config_.position_debias, config_.parallelism);
      report.bucket = name;
      reports.push_back(ordered_json::parse(report_to_json(report)));
      table += render_report_table(report) + "\n";
    }
    out_json["schema"] = "cpr/report_set/v1";
    out_json["reports"] = reports;
  }

  std::ofstream out(report_path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + report_path);
  out << out_json.dump(2) << '\n';
  return table;
}

std::string schema_versions_json() {
  ordered_json j;
  j["refined"] = kRefinedSchema;
  j["report"] = kReportSchema;
  j["report_set"] = "cpr/report_set/v1";
  j["lexical"] = "cpr/lexical/v1";
  j["dataset"] = "cpr/dataset/v1";
  return j.dump();
}

}  // namespace cpr
