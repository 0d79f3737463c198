#include "dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "templates.hpp"

namespace cpr {

using nlohmann::json;
using nlohmann::ordered_json;

void CorruptionSpec::validate() const {
  if (ops_per_text <= 0) throw InvalidConfigError("corruption: ops_per_text must be positive");
  if (w_drop_punct < 0 || w_swap_punct < 0 || w_insert_punct < 0 || w_case_flip < 0) {
    throw InvalidConfigError("corruption: weights must be non-negative");
  }
  if (w_drop_punct + w_swap_punct + w_insert_punct + w_case_flip <= 0) {
    throw InvalidConfigError("corruption: weights must sum > 0");
  }
}

namespace {

constexpr const char* kPunctAlphabet = ".,;:!?";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::size_t pick_index(std::mt19937_64& rng, std::size_t count) {
  return static_cast<std::size_t>(rng() % count);
}

// Platform-stable weighted choice over four op slots.
int pick_op(std::mt19937_64& rng, const double weights[4]) {
  double total = 0;
  for (int i = 0; i < 4; ++i) total += weights[i];
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  double acc = 0;
  for (int i = 0; i < 4; ++i) {
    acc += weights[i];
    if (u < acc && weights[i] > 0) return i;
  }
  for (int i = 3; i >= 0; --i) {
    if (weights[i] > 0) return i;
  }
  return 0;
}

std::vector<std::size_t> positions_of(const std::string& s, bool (*pred)(char)) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (pred(s[i])) out.push_back(i);
  }
  return out;
}

}  // namespace

CorruptionResult corrupt_text(const std::string& text, const CorruptionSpec& spec) {
  spec.validate();
  if (text.empty()) throw EmptyInputError("corrupt_text: empty text");

  std::mt19937_64 rng(spec.seed ^ fnv1a(text));
  std::string out = text;
  bool edited = false;

  for (int op = 0; op < spec.ops_per_text; ++op) {
    const auto punct = positions_of(out, is_punct);
    const auto letters = positions_of(out, is_letter);
    double weights[4] = {
        punct.empty() ? 0.0 : spec.w_drop_punct,
        punct.empty() ? 0.0 : spec.w_swap_punct,
        spec.w_insert_punct,
        letters.empty() ? 0.0 : spec.w_case_flip,
    };
    if (weights[0] + weights[1] + weights[2] + weights[3] <= 0) break;

    switch (pick_op(rng, weights)) {
      case 0: {  // drop a punctuation mark
        out.erase(punct[pick_index(rng, punct.size())], 1);
        edited = true;
        break;
      }
      case 1: {  // replace a punctuation mark with a different one
        const std::size_t at = punct[pick_index(rng, punct.size())];
        char repl = out[at];
        while (repl == out[at]) {
          repl = kPunctAlphabet[pick_index(rng, 6)];
        }
        out[at] = repl;
        edited = true;
        break;
      }
      case 2: {  // insert a punctuation mark
        const char mark = kPunctAlphabet[pick_index(rng, 6)];
        out.insert(out.begin() + static_cast<long>(pick_index(rng, out.size() + 1)), mark);
        edited = true;
        break;
      }
      case 3: {  // flip the case of a letter
        const std::size_t at = letters[pick_index(rng, letters.size())];
        const unsigned char c = static_cast<unsigned char>(out[at]);
        out[at] = std::isupper(c) ? static_cast<char>(std::tolower(c))
                                  : static_cast<char>(std::toupper(c));
        edited = true;
        break;
      }
    }
  }
  return CorruptionResult{std::move(out), edited};
}

namespace {

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06zu", prefix, i);
  return buf;
}

std::string instruction_for(TaskKind task) {
  TemplateStore store;
  switch (task) {
    case TaskKind::punctuation_repair:
      return store.get(kInstrRepair);
    case TaskKind::paraphrase:
      return store.get(kInstrParaphrase);
    case TaskKind::describe_task:
      return store.get(kInstrDescribe);
  }
  return {};
}

}  // namespace

std::vector<InstructionExample> build_wikien(const std::vector<std::string>& clean_texts,
                                             const CorruptionSpec& spec, std::size_t n) {
  if (clean_texts.size() < n) {
    throw InsufficientCorpusError("wikien: need " + std::to_string(n) + " texts, have " +
                                  std::to_string(clean_texts.size()));
  }
  const std::string instruction = instruction_for(TaskKind::punctuation_repair);
  std::vector<InstructionExample> out;
  out.reserve(n);
  for (const auto& text : clean_texts) {
    if (out.size() == n) break;
    if (text.empty()) continue;
    const auto corrupted = corrupt_text(text, spec);
    if (!corrupted.corruptible || corrupted.text == text) continue;
    InstructionExample ex;
    ex.task = TaskKind::punctuation_repair;
    ex.instruction = instruction;
    ex.input = corrupted.text;
    ex.target = text;
    ex.source = CorpusSource::wikien;
    ex.id = make_id("wikien", out.size());
    out.push_back(std::move(ex));
  }
  if (out.size() < n) {
    throw InsufficientCorpusError("wikien: only " + std::to_string(out.size()) +
                                  " corruptible texts for n=" + std::to_string(n));
  }
  return out;
}

std::vector<InstructionExample> build_mqr(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  const std::string instruction = instruction_for(TaskKind::paraphrase);
  std::vector<InstructionExample> out;
  out.reserve(pairs.size());
  std::string bad;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first.empty() || pairs[i].second.empty()) {
      bad += (bad.empty() ? "" : ", ") + make_id("mqr", i);
      continue;
    }
    InstructionExample ex;
    ex.task = TaskKind::paraphrase;
    ex.instruction = instruction;
    ex.input = pairs[i].first;
    ex.target = pairs[i].second;
    ex.source = CorpusSource::mqr;
    ex.id = make_id("mqr", i);
    out.push_back(std::move(ex));
  }
  if (!bad.empty()) {
    throw Error(ErrorCode::io, "mqr: pairs with empty members: " + bad);
  }
  return out;
}

std::vector<InstructionExample> build_wikid(const std::vector<WikidEntry>& entries,
                                            std::size_t n) {
  if (entries.size() < n) {
    throw InsufficientCorpusError("wikid: need " + std::to_string(n) + " entries, have " +
                                  std::to_string(entries.size()));
  }
  std::vector<WikidEntry> ranked = entries;
  std::sort(ranked.begin(), ranked.end(), [](const WikidEntry& a, const WikidEntry& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.keyword < b.keyword;  // frequency ties break lexicographically
  });
  const std::string instruction = instruction_for(TaskKind::describe_task);
  std::vector<InstructionExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    InstructionExample ex;
    ex.task = TaskKind::describe_task;
    ex.instruction = instruction;
    ex.input = ranked[i].keyword;
    ex.target = ranked[i].description;
    ex.source = CorpusSource::wikid;
    ex.id = make_id("wikid", i);
    out.push_back(std::move(ex));
  }
  return out;
}

std::string task_name(TaskKind task) {
  switch (task) {
    case TaskKind::punctuation_repair:
      return "punctuation_repair";
    case TaskKind::paraphrase:
      return "paraphrase";
    case TaskKind::describe_task:
      return "describe";
  }
  return {};
}

std::string source_name(CorpusSource source) {
  switch (source) {
    case CorpusSource::wikien:
      return "wikien";
    case CorpusSource::mqr:
      return "mqr";
    case CorpusSource::wikid:
      return "wikid";
  }
  return {};
}

namespace {

TaskKind task_from_name(const std::string& name) {
  if (name == "punctuation_repair") return TaskKind::punctuation_repair;
  if (name == "paraphrase") return TaskKind::paraphrase;
  if (name == "describe") return TaskKind::describe_task;
  throw Error(ErrorCode::io, "dataset: unknown task " + name);
}

CorpusSource source_from_name(const std::string& name) {
  if (name == "wikien") return CorpusSource::wikien;
  if (name == "mqr") return CorpusSource::mqr;
  if (name == "wikid") return CorpusSource::wikid;
  throw Error(ErrorCode::io, "dataset: unknown source " + name);
}

void check_pairing(const InstructionExample& ex) {
  const bool ok = (ex.source == CorpusSource::wikien && ex.task == TaskKind::punctuation_repair) ||
                  (ex.source == CorpusSource::mqr && ex.task == TaskKind::paraphrase) ||
                  (ex.source == CorpusSource::wikid && ex.task == TaskKind::describe_task);
  if (!ok) {
    throw Error(ErrorCode::io, "dataset: task/source mismatch for " + ex.id);
  }
  if (ex.task == TaskKind::punctuation_repair && ex.input == ex.target) {
    throw Error(ErrorCode::io, "dataset: uncorrupted punctuation_repair example " + ex.id);
  }
}

}  // namespace

std::string emit_jsonl(const std::vector<InstructionExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    check_pairing(ex);
    ordered_json j;
    j["id"] = ex.id;
    j["task"] = task_name(ex.task);
    j["instruction"] = ex.instruction;
    j["input"] = ex.input;
    j["target"] = ex.target;
    j["source"] = source_name(ex.source);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<InstructionExample> parse_jsonl(const std::string& jsonl) {
  std::vector<InstructionExample> out;
  std::istringstream in(jsonl);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw Error(ErrorCode::io, "dataset: line " + std::to_string(lineno) + ": invalid JSON");
    }
    InstructionExample ex;
    try {
      ex.id = parsed.at("id").get<std::string>();
      ex.task = task_from_name(parsed.at("task").get<std::string>());
      ex.instruction = parsed.at("instruction").get<std::string>();
      ex.input = parsed.at("input").get<std::string>();
      ex.target = parsed.at("target").get<std::string>();
      ex.source = source_from_name(parsed.at("source").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::io,
                  "dataset: line " + std::to_string(lineno) + ": " + e.what());
    }
    check_pairing(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus readers

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_mqr_tsv(const std::string& path,
                                                              bool skip_bad,
                                                              std::vector<std::string>* errors) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      const std::string msg = path + ":" + std::to_string(lineno) + ": expected ill<TAB>well";
      if (errors) errors->push_back(msg);
      if (!skip_bad) throw Error(ErrorCode::io, msg);
      continue;
    }
    out.emplace_back(fields[0], fields[1]);
  }
  return out;
}

std::vector<WikidEntry> read_wikid_tsv(const std::string& path, bool skip_bad,
                                       std::vector<std::string>* errors) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<WikidEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    bool ok = fields.size() == 3 && !fields[0].empty() && !fields[1].empty();
    double freq = 0.0;
    if (ok) {
      try {
        freq = std::stod(fields[2]);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      const std::string msg =
          path + ":" + std::to_string(lineno) + ": expected keyword<TAB>description<TAB>frequency";
      if (errors) errors->push_back(msg);
      if (!skip_bad) throw Error(ErrorCode::io, msg);
      continue;
    }
    out.push_back(WikidEntry{fields[0], fields[1], freq});
  }
  return out;
}

}  // namespace cpr
