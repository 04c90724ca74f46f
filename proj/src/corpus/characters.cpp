#include "coseg/corpus/characters.hpp"

#include <array>

#include "coseg/text.hpp"

namespace coseg::corpus {

namespace {

bool is_subject_relation(const std::string& deprel) {
  return deprel == "nsubj" || deprel.rfind("nsubj:", 0) == 0;
}

bool passes_pos_gate(const std::string& upos, const CharacterOptions& options) {
  if (upos == "PROPN" || upos == "PRON") return true;
  return upos == "NOUN" && options.allow_common_nouns;
}

}  // namespace

bool is_first_person(std::string_view word) {
  static constexpr std::array<std::string_view, 4> kForms = {"i", "me", "my", "mine"};
  const std::string w = to_lower(word);
  for (auto f : kForms) {
    if (w == f) return true;
  }
  return false;
}

std::string character_key(std::string_view form, std::string_view lemma) {
  if (is_first_person(form)) return "I";
  if (lemma.empty() || lemma == "_") return to_lower(form);
  return to_lower(lemma);
}

std::string character_key(const DependencyToken& token) {
  return character_key(token.form, token.lemma);
}

std::optional<std::size_t> root_subject(const Sentence& sentence, const CharacterOptions& options) {
  const std::size_t root = sentence.root();
  for (std::size_t pos : sentence.dependents(root)) {
    const auto& tok = sentence.tokens[pos];
    if (is_subject_relation(tok.deprel) && passes_pos_gate(tok.upos, options)) return pos;
  }
  return std::nullopt;
}

std::vector<Character> identify_characters(const Story& story, const CharacterOptions& options) {
  std::vector<Character> out;
  for (std::size_t s = 0; s < story.context.size(); ++s) {
    const Sentence& sentence = story.context[s];
    auto pos = root_subject(sentence, options);
    if (!pos) continue;
    const auto& tok = sentence.tokens[*pos];
    const std::string key = character_key(tok);
    Character* ch = nullptr;
    for (auto& c : out) {
      if (c.canonical_id == key) ch = &c;
    }
    if (!ch) {
      out.push_back(Character{key, {}, {}});
      ch = &out.back();
    }
    ch->mentions.push_back(Mention{s, *pos, tok.form});
    if (ch->sentence_indices.empty() || ch->sentence_indices.back() != s) {
      ch->sentence_indices.push_back(s);
    }
  }
  return out;
}

void annotate_characters(Story& story, const CharacterOptions& options) {
  story.characters = identify_characters(story, options);
}

}  // namespace coseg::corpus
