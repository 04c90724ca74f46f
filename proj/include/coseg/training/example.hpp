#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coseg/corpus/story.hpp"
#include "coseg/corpus/vocabulary.hpp"
#include "coseg/extraction/experience.hpp"
#include "coseg/model/coseg_model.hpp"

namespace coseg::training {

/// One (story, character) pair with token ids ready for the network.
struct Example {
  std::string story_id;
  std::string character_id;
  model::ModelInput input;
  /// Ending ids followed by EOS (BOS is fed implicitly by the decoder).
  std::vector<std::size_t> target;

  std::size_t experience_count() const { return input.character.experiences.size(); }
  std::size_t context_length() const;
};

/// Context sentences as id lists.
std::vector<std::vector<std::size_t>> encode_context(const corpus::Story& story,
                                                     const corpus::Vocabulary& vocab);

/// Experience token ids: context words, OBJ id, entity words.
std::vector<std::size_t> encode_experience(const extraction::CharacterExperience& exp,
                                           const corpus::Vocabulary& vocab);

/// Network input for one character of the story.
model::ModelInput make_input(const corpus::Story& story, const extraction::ExperienceSequence& seq,
                             const corpus::Vocabulary& vocab);

/// Example for the ground-truth-ending character. If that character does
/// not appear in the context, the example uses the S = 0 path with the
/// ending subject (or UNK) as character token; with `require_sufficient`
/// such stories and any with fewer than 2 experiences yield nullopt.
/// `story.characters` must be filled.
std::optional<Example> make_example(const corpus::Story& story, const corpus::Vocabulary& vocab,
                                    bool require_sufficient);

}  // namespace coseg::training
