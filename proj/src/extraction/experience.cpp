#include "coseg/extraction/experience.hpp"

#include <array>

#include "coseg/error.hpp"

namespace coseg::extraction {

using corpus::Character;
using corpus::Sentence;
using corpus::Story;

namespace {

bool is_context_pos(const std::string& upos) {
  return upos == "VERB" || upos == "NOUN" || upos == "PROPN" || upos == "ADJ";
}

bool has_relation(const std::string& deprel, const char* rel) {
  const std::string r(rel);
  return deprel == r || deprel.rfind(r + ":", 0) == 0;
}

}  // namespace

std::vector<std::string> CharacterExperience::merged() const {
  std::vector<std::string> out = context_words;
  out.push_back(kObjMarker);
  out.insert(out.end(), entity_words.begin(), entity_words.end());
  return out;
}

std::optional<std::size_t> object_of(const Sentence& sentence, std::size_t head_pos) {
  static constexpr std::array<const char*, 3> kPreference = {"obj", "iobj", "ccomp"};
  const auto deps = sentence.dependents(head_pos);
  for (const char* rel : kPreference) {
    for (std::size_t d : deps) {
      if (has_relation(sentence.tokens[d].deprel, rel)) return d;
    }
  }
  return std::nullopt;
}

CharacterExperience extract_experience(const Sentence& sentence, std::size_t character_pos,
                                       std::size_t sentence_index) {
  if (character_pos >= sentence.size()) {
    throw InputError("extract_experience: character position out of range");
  }
  const auto& ch = sentence.tokens[character_pos];
  if (ch.head == 0) {
    throw InputError("extract_experience: character '" + ch.form + "' has no headword");
  }
  const std::size_t head_pos = static_cast<std::size_t>(ch.head - 1);

  CharacterExperience exp;
  exp.sentence_index = sentence_index;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i != character_pos && is_context_pos(sentence.tokens[i].upos)) {
      exp.context_words.push_back(sentence.tokens[i].form);
    }
  }
  exp.entity_words.push_back(sentence.tokens[head_pos].form);
  if (auto obj = object_of(sentence, head_pos); obj && *obj != character_pos) {
    exp.entity_words.push_back(sentence.tokens[*obj].form);
  }
  exp.entity_words.push_back(ch.form);
  return exp;
}

ExperienceSequence build_experience_sequence(const Story& story, const Character& character) {
  ExperienceSequence seq{character, {}};
  for (const auto& m : character.mentions) {
    if (!seq.experiences.empty() && seq.experiences.back().sentence_index == m.sentence) continue;
    seq.experiences.push_back(extract_experience(story.context.at(m.sentence), m.token, m.sentence));
  }
  return seq;
}

std::vector<ExperienceSequence> build_experience_sequences(const Story& story) {
  std::vector<ExperienceSequence> out;
  out.reserve(story.characters.size());
  for (const auto& c : story.characters) out.push_back(build_experience_sequence(story, c));
  return out;
}

std::optional<corpus::DependencyToken> ending_subject(const Story& story,
                                                      const corpus::CharacterOptions& options) {
  auto pos = corpus::root_subject(story.ending, options);
  if (!pos) return std::nullopt;
  return story.ending.tokens[*pos];
}

std::optional<Character> ground_truth_character(const Story& story,
                                                const corpus::CharacterOptions& options) {
  auto subj = ending_subject(story, options);
  if (!subj) return std::nullopt;
  const std::string key = corpus::character_key(*subj);
  const std::vector<Character> chars =
      story.characters.empty() ? corpus::identify_characters(story, options) : story.characters;
  for (const auto& c : chars) {
    if (c.canonical_id == key) return c;
  }
  return std::nullopt;
}

}  // namespace coseg::extraction
