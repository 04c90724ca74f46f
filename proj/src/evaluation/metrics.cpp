#include "coseg/evaluation/metrics.hpp"

#include <array>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "coseg/corpus/characters.hpp"
#include "coseg/extraction/experience.hpp"
#include "coseg/text.hpp"
#include "coseg/training/example.hpp"
#include "coseg/training/trainer.hpp"

namespace coseg::evaluation {

using corpus::Vocabulary;

namespace {

constexpr std::size_t kSubjectWindow = 3;

bool is_possessive(const std::string& w) {
  static const std::set<std::string> kPossessives = {"my", "your", "his", "her", "its", "our", "their"};
  return kPossessives.count(w) > 0;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

Tokens lower_words(const corpus::Sentence& s) {
  Tokens out;
  for (const auto& t : s.tokens) out.push_back(to_lower(t.form));
  return out;
}

}  // namespace

Tokens GenerationRecord::ending() const {
  Tokens out;
  for (const auto& t : generated) {
    if (t == Vocabulary::reserved_tokens()[Vocabulary::kEos]) break;
    out.push_back(t);
  }
  return out;
}

CharacterForms character_forms(const std::vector<corpus::Character>& characters) {
  CharacterForms out;
  for (const auto& c : characters) {
    auto& forms = out[c.canonical_id];
    for (const auto& f : c.surface_forms()) forms.push_back(f);
    if (c.canonical_id == "I") {
      forms.push_back("i");
      forms.push_back("me");
    }
  }
  return out;
}

std::optional<std::string> ending_subject_character(const Tokens& ending, const CharacterForms& forms) {
  for (std::size_t i = 0; i < std::min(ending.size(), kSubjectWindow); ++i) {
    const std::string w = to_lower(ending[i]);
    if (is_possessive(w)) continue;
    if (corpus::is_first_person(w) && forms.count("I")) return std::string("I");
    for (const auto& [id, list] : forms) {
      for (const auto& f : list) {
        if (f == w) return id;
      }
    }
  }
  return std::nullopt;
}

double success_rate(const std::vector<GenerationRecord>& records,
                    const std::map<std::string, CharacterForms>& forms_by_story) {
  if (records.empty()) throw std::invalid_argument("success_rate: no records");
  std::size_t hits = 0;
  for (const auto& r : records) {
    auto it = forms_by_story.find(r.story_id);
    if (it == forms_by_story.end()) continue;
    auto who = ending_subject_character(r.ending(), it->second);
    if (who && *who == r.character_id) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<GenerationRecord> generate_all(model::CosegModel& model, const corpus::Story& story,
                                           const Vocabulary& vocab, std::size_t max_len) {
  std::vector<GenerationRecord> out;
  for (const auto& seq : extraction::build_experience_sequences(story)) {
    GenerationRecord rec;
    rec.story_id = story.id;
    rec.character_id = seq.character.canonical_id;
    rec.experience_count = seq.count();
    const auto ids = model.generate(training::make_input(story, seq, vocab), max_len, &rec.fallback);
    rec.generated = vocab.decode(ids);
    rec.reference = lower_words(story.ending);
    out.push_back(std::move(rec));
  }
  return out;
}

SplitEvaluation evaluate_split(model::CosegModel& model, const std::vector<const corpus::Story*>& split,
                               const Vocabulary& vocab, const std::string& split_name,
                               const std::string& model_name, std::size_t max_len, BleuMode mode) {
  if (split.empty()) throw std::invalid_argument("evaluate_split: split '" + split_name + "' is empty");
  SplitEvaluation out;
  MetricsReport& rep = out.report;
  rep.split = split_name;
  rep.model = model_name;
  rep.stories = split.size();

  std::vector<training::Example> examples;
  std::map<std::string, CharacterForms> forms;
  std::vector<Tokens> candidates, references;
  for (const corpus::Story* story : split) {
    auto ex = training::make_example(*story, vocab, /*require_sufficient=*/false);
    CharacterForms story_forms = character_forms(story->characters);
    if (!story_forms.count(ex->character_id)) {
      // Ending character absent from the context: match on the ending subject.
      if (auto subj = extraction::ending_subject(*story)) {
        story_forms[ex->character_id].push_back(to_lower(subj->form));
      }
    }
    forms[story->id] = std::move(story_forms);

    GenerationRecord rec;
    rec.story_id = story->id;
    rec.character_id = ex->character_id;
    rec.experience_count = ex->experience_count();
    rec.generated = vocab.decode(model.generate(ex->input, max_len, &rec.fallback));
    rec.reference = lower_words(story->ending);
    candidates.push_back(rec.ending());
    references.push_back(*rec.reference);
    out.records.push_back(std::move(rec));
    examples.push_back(std::move(*ex));
  }

  const auto ppl = training::evaluate_perplexity(model, examples);
  rep.ppl = ppl.ppl;
  rep.target_tokens = ppl.tokens;
  rep.bleu1 = bleu_n(candidates, references, 1, mode);
  rep.bleu2 = bleu_n(candidates, references, 2, mode);
  rep.bleu3 = bleu_n(candidates, references, 3, mode);
  rep.sucr = success_rate(out.records, forms);

  std::vector<GenerationRecord> fallback;
  for (const auto& r : out.records) {
    if (r.fallback) fallback.push_back(r);
  }
  rep.fallback_records = fallback.size();
  if (!fallback.empty()) rep.sucr_fallback = success_rate(fallback, forms);
  return out;
}

void write_metrics_csv_header(std::ostream& out) {
  out << "split,model,ppl,bleu1,bleu2,bleu3,sucr\n";
}

void write_metrics_csv_row(std::ostream& out, const MetricsReport& r) {
  out << r.split << ',' << r.model << ',' << fixed(r.ppl) << ',' << fixed(r.bleu1) << ','
      << fixed(r.bleu2) << ',' << fixed(r.bleu3) << ',' << fixed(r.sucr) << '\n';
}

void print_metrics_table(std::ostream& out, const std::vector<MetricsReport>& reports) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %-10s %10s %8s %8s %8s %7s %8s %10s\n", "split", "model",
                "PPL", "BLEU-1", "BLEU-2", "BLEU-3", "SucR", "stories", "fallback");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-12s %-10s %10.4f %8.2f %8.2f %8.2f %7.3f %8zu %10zu\n",
                  r.split.c_str(), r.model.c_str(), r.ppl, r.bleu1, r.bleu2, r.bleu3, r.sucr,
                  r.stories, r.fallback_records);
    out << line;
    if (r.sucr_fallback) {
      std::snprintf(line, sizeof(line), "  SucR over %zu fallback (S=0) records: %.3f\n",
                    r.fallback_records, *r.sucr_fallback);
      out << line;
    }
  }
}

void write_generations_jsonl(std::ostream& out, const std::vector<GenerationRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["story_id"] = r.story_id;
    j["character_id"] = r.character_id;
    j["S"] = r.experience_count;
    j["fallback"] = r.fallback;
    j["generated"] = r.generated;
    j["ending"] = join(r.ending(), " ");
    if (r.reference) j["reference"] = *r.reference;
    out << j.dump() << '\n';
  }
}

}  // namespace coseg::evaluation
