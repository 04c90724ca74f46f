#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coseg/corpus/story.hpp"
#include "coseg/corpus/vocabulary.hpp"
#include "coseg/evaluation/bleu.hpp"
#include "coseg/model/coseg_model.hpp"

namespace coseg::evaluation {

struct GenerationRecord {
  std::string story_id;
  std::string character_id;
  std::size_t experience_count = 0;
  /// Generated via the S = 0 path.
  bool fallback = false;
  /// Greedy output including the trailing EOS token when one was produced.
  Tokens generated;
  std::optional<Tokens> reference;

  /// Generated tokens without the EOS marker.
  Tokens ending() const;

  bool operator==(const GenerationRecord&) const = default;
};

/// Surface forms (lower-cased) that refer to each character of a story.
using CharacterForms = std::map<std::string, std::vector<std::string>>;

CharacterForms character_forms(const std::vector<corpus::Character>& characters);

/// Approximate subject of a generated ending: among the first three tokens
/// (possessive determiners skipped), the first one that names a known
/// character. Returns that character's id.
std::optional<std::string> ending_subject_character(const Tokens& ending, const CharacterForms& forms);

/// Fraction of records whose ending subject is the targeted character.
/// `forms_by_story` maps story id to the story's character forms; a record
/// whose story is missing, or whose ending names no character, counts as a
/// failure. Throws std::invalid_argument on an empty record list.
double success_rate(const std::vector<GenerationRecord>& records,
                    const std::map<std::string, CharacterForms>& forms_by_story);

/// One greedy ending per character of the story (characters must be
/// identified). Characters with no experience take the fallback path.
std::vector<GenerationRecord> generate_all(model::CosegModel& model, const corpus::Story& story,
                                           const corpus::Vocabulary& vocab, std::size_t max_len);

struct MetricsReport {
  std::string split;
  std::string model;
  double ppl = 0.0;
  double bleu1 = 0.0;
  double bleu2 = 0.0;
  double bleu3 = 0.0;
  double sucr = 0.0;
  std::size_t stories = 0;
  std::size_t target_tokens = 0;
  std::size_t fallback_records = 0;
  /// SucR restricted to fallback (S = 0) records, if any.
  std::optional<double> sucr_fallback;
};

struct SplitEvaluation {
  MetricsReport report;
  std::vector<GenerationRecord> records;
};

/// Teacher-forced PPL on the ground-truth character, BLEU-1/2/3 of greedy
/// endings against the references, and SucR of those endings. Characters
/// must be identified on every story.
SplitEvaluation evaluate_split(model::CosegModel& model, const std::vector<const corpus::Story*>& split,
                               const corpus::Vocabulary& vocab, const std::string& split_name,
                               const std::string& model_name, std::size_t max_len,
                               BleuMode mode = BleuMode::Cumulative);

/// `split,model,ppl,bleu1,bleu2,bleu3,sucr`
void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_row(std::ostream& out, const MetricsReport& report);
void print_metrics_table(std::ostream& out, const std::vector<MetricsReport>& reports);

/// One JSON object per record.
void write_generations_jsonl(std::ostream& out, const std::vector<GenerationRecord>& records);

}  // namespace coseg::evaluation
