#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cpr {

enum class TaskKind { punctuation_repair, paraphrase, describe_task };
enum class CorpusSource { wikien, mqr, wikid };

struct InstructionExample {
  TaskKind task = TaskKind::punctuation_repair;
  std::string instruction;
  std::string input;
  std::string target;
  CorpusSource source = CorpusSource::wikien;
  std::string id;
};

struct CorruptionSpec {
  std::uint64_t seed = 0;
  int ops_per_text = 1;
  double w_drop_punct = 1.0;
  double w_swap_punct = 1.0;
  double w_insert_punct = 1.0;
  double w_case_flip = 1.0;

  void validate() const;
};

struct CorruptionResult {
  std::string text;
  bool corruptible = true;  // false when nothing in the text could be edited
};

// Deterministic under (text, seed): the PRNG is seeded from the spec seed
// mixed with a hash of the text.
CorruptionResult corrupt_text(const std::string& text, const CorruptionSpec& spec);

std::vector<InstructionExample> build_wikien(const std::vector<std::string>& clean_texts,
                                             const CorruptionSpec& spec, std::size_t n);
std::vector<InstructionExample> build_mqr(
    const std::vector<std::pair<std::string, std::string>>& pairs);

struct WikidEntry {
  std::string keyword;
  std::string description;
  double frequency = 0.0;
};
std::vector<InstructionExample> build_wikid(const std::vector<WikidEntry>& entries,
                                            std::size_t n);

// JSONL emission: {id, task, instruction, input, target, source} per line.
std::string emit_jsonl(const std::vector<InstructionExample>& examples);
std::vector<InstructionExample> parse_jsonl(const std::string& jsonl);

std::string task_name(TaskKind task);
std::string source_name(CorpusSource source);

// Corpus readers for the CLI: one document per line (WikiEn), TSV pairs
// (MQR: ill<TAB>well), TSV triples (WikiD: keyword<TAB>description<TAB>frequency).
std::vector<std::string> read_lines(const std::string& path);
std::vector<std::pair<std::string, std::string>> read_mqr_tsv(const std::string& path,
                                                              bool skip_bad,
                                                              std::vector<std::string>* errors);
std::vector<WikidEntry> read_wikid_tsv(const std::string& path, bool skip_bad,
                                       std::vector<std::string>* errors);

}  // namespace cpr
