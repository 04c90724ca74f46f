#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coseg/corpus/story.hpp"

namespace coseg::corpus {

struct CharacterOptions {
  /// Admit common-noun subjects ("son", "car"). When false only proper
  /// nouns and pronouns become characters.
  bool allow_common_nouns = true;
};

/// Canonical character key of a word. First-person forms (I, me, my, mine)
/// map to "I"; anything else to its lower-cased lemma.
std::string character_key(std::string_view form, std::string_view lemma);
std::string character_key(const DependencyToken& token);

bool is_first_person(std::string_view word);

/// Position of the subject of the sentence root, if it passes the POS gate
/// (NOUN, PROPN, PRON). Subject relations are nsubj and its subtypes.
std::optional<std::size_t> root_subject(const Sentence& sentence,
                                        const CharacterOptions& options = {});

/// One Character per distinct canonical subject across the context
/// sentences, in order of first appearance.
std::vector<Character> identify_characters(const Story& story, const CharacterOptions& options = {});

/// Identifies characters and stores them in `story.characters`.
void annotate_characters(Story& story, const CharacterOptions& options = {});

}  // namespace coseg::corpus
