#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coseg/corpus/characters.hpp"
#include "coseg/corpus/story.hpp"

namespace coseg::extraction {

/// Separator placed between the context part and the entity part.
inline const std::string kObjMarker = "OBJ";

/// What a character went through in one sentence.
struct CharacterExperience {
  /// Open-class words of the sentence (VERB, NOUN, PROPN, ADJ) in surface
  /// order, without the character's own token.
  std::vector<std::string> context_words;
  /// [headword, object of headword (if any), character].
  std::vector<std::string> entity_words;
  std::size_t sentence_index = 0;

  /// context_words ++ [OBJ] ++ entity_words.
  std::vector<std::string> merged() const;

  bool operator==(const CharacterExperience&) const = default;
};

struct ExperienceSequence {
  corpus::Character character;
  std::vector<CharacterExperience> experiences;

  std::size_t count() const { return experiences.size(); }
};

/// Extracts the experience of the subject at `character_pos` (0-based).
/// Throws InputError if the character token has no head (it is the root).
CharacterExperience extract_experience(const corpus::Sentence& sentence, std::size_t character_pos,
                                       std::size_t sentence_index = 0);

/// Position of the object of the token at `head_pos`: obj, else iobj,
/// else ccomp.
std::optional<std::size_t> object_of(const corpus::Sentence& sentence, std::size_t head_pos);

/// One sequence per character of `story.characters`, same order; each
/// sequence lists one experience per subject mention, chronologically.
std::vector<ExperienceSequence> build_experience_sequences(const corpus::Story& story);

/// Sequence for a single character.
ExperienceSequence build_experience_sequence(const corpus::Story& story,
                                             const corpus::Character& character);

/// The context character matching the ending's root subject, if any.
std::optional<corpus::Character> ground_truth_character(
    const corpus::Story& story, const corpus::CharacterOptions& options = {});

/// Root subject token of the ending, regardless of whether it matches a
/// context character.
std::optional<corpus::DependencyToken> ending_subject(const corpus::Story& story,
                                                      const corpus::CharacterOptions& options = {});

}  // namespace coseg::extraction
