#include "compose.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"

namespace cpr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string assemble(const CleanedPrompt& cleaned, const DescriptionSet& descriptions,
                     Layout layout) {
  if (descriptions.items.empty()) return cleaned.text;

  std::string context = "Context:";
  for (const auto& d : descriptions.items) {
    context += "\n- " + d.text;
  }
  const std::string question = "Question: " + cleaned.text;
  if (layout == Layout::context_then_question) {
    return context + "\n" + question;
  }
  return question + "\n" + context;
}

namespace {

class StageTimer {
 public:
  StageTimer(std::vector<StageEvent>& trace, std::string stage)
      : trace_(trace), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  void finish(int backend_calls) {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    trace_.push_back(StageEvent{
        stage_, std::chrono::duration<double, std::milli>(elapsed).count(), backend_calls});
  }

 private:
  std::vector<StageEvent>& trace_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

RefinedPrompt run_pipeline(const PromptRecord& prompt, const PipelineOptions& options,
                           const LmClient& refine_backend, const LmClient& describe_backend,
                           const TemplateStore& templates) {
  RefinedPrompt out;
  out.source = prompt;

  {
    StageTimer timer(out.trace, "clean");
    try {
      out.cleaned = clean(prompt, refine_backend, templates);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("stage clean: ") + e.what());
    }
    timer.finish(1);
  }

  if (options.enable_descriptions) {
    StageTimer timer(out.trace, "describe");
    try {
      out.descriptions = generate_descriptions(out.cleaned, options.describe, describe_backend,
                                               templates);
      timer.finish(static_cast<int>(out.descriptions.items.size()) + 1);
    } catch (const Error& e) {
      if (!options.degrade) {
        throw Error(e.code(), std::string("stage describe: ") + e.what());
      }
      out.descriptions = DescriptionSet{};
      timer.finish(0);
      out.trace.push_back(StageEvent{"degrade", 0.0, 0});
    }
  }

  {
    StageTimer timer(out.trace, "assemble");
    out.final_text = assemble(out.cleaned, out.descriptions, options.layout);
    timer.finish(0);
  }
  return out;
}

std::vector<BatchItem> run_batch(const std::vector<PromptRecord>& prompts,
                                 const PipelineOptions& options, const LmClient& refine_backend,
                                 const LmClient& describe_backend, int parallelism,
                                 const TemplateStore& templates) {
  if (parallelism < 1) throw InvalidConfigError("run_batch: parallelism must be >= 1");
  std::vector<BatchItem> results(prompts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) return;
      try {
        results[i].result =
            run_pipeline(prompts[i], options, refine_backend, describe_backend, templates);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(parallelism), prompts.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

// ---------------------------------------------------------------------------
// Wire formats

PromptRecord prompt_record_from_json(const std::string& line) {
  auto parsed = json::parse(line, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::io, "prompt record: invalid JSON");
  }
  PromptRecord rec;
  if (!parsed.contains("id") || !parsed.contains("raw_text")) {
    throw Error(ErrorCode::io, "prompt record: missing id or raw_text");
  }
  rec.id = parsed["id"].get<std::string>();
  rec.raw_text = parsed["raw_text"].get<std::string>();
  if (parsed.contains("well_formedness") && !parsed["well_formedness"].is_null()) {
    rec.well_formedness = parsed["well_formedness"].get<double>();
  }
  return rec;
}

std::vector<PromptRecord> read_prompt_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<PromptRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(prompt_record_from_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::io,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

ordered_json refined_to_ojson(const RefinedPrompt& r, bool include_timings) {
  ordered_json j;
  j["schema"] = kRefinedSchema;
  j["id"] = r.source.id;
  j["raw_text"] = r.source.raw_text;
  if (r.source.well_formedness) j["well_formedness"] = *r.source.well_formedness;
  j["cleaned"] = {{"text", r.cleaned.text}, {"fallback", r.cleaned.fallback}};
  ordered_json items = ordered_json::array();
  for (const auto& d : r.descriptions.items) {
    items.push_back({{"text", d.text},
                     {"ppl", d.ppl.value},
                     {"token_count", d.ppl.token_count},
                     {"gen_index", d.gen_index}});
  }
  j["descriptions"] = {
      {"halted_by",
       r.descriptions.halted_by == HaltReason::cap_reached ? "cap_reached" : "threshold_exceeded"},
      {"items", items}};
  j["final_text"] = r.final_text;
  ordered_json trace = ordered_json::array();
  for (const auto& ev : r.trace) {
    ordered_json e = {{"stage", ev.stage}, {"backend_calls", ev.backend_calls}};
    // Timings are opt-in so that output files stay byte-reproducible.
    if (include_timings) e["duration_ms"] = ev.duration_ms;
    trace.push_back(e);
  }
  j["trace"] = trace;
  return j;
}

}  // namespace

std::string refined_prompt_to_json(const RefinedPrompt& refined, bool include_timings) {
  return refined_to_ojson(refined, include_timings).dump();
}

std::string batch_item_to_json(const PromptRecord& source, const BatchItem& item,
                               bool include_timings) {
  if (item.result) return refined_prompt_to_json(*item.result, include_timings);
  ordered_json j;
  j["schema"] = kRefinedSchema;
  j["id"] = source.id;
  j["raw_text"] = source.raw_text;
  j["error"] = item.error;
  return j.dump();
}

}  // namespace cpr
