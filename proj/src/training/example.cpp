#include "coseg/training/example.hpp"

#include "coseg/corpus/characters.hpp"
#include "coseg/corpus/splits.hpp"

namespace coseg::training {

using corpus::Vocabulary;

std::size_t Example::context_length() const {
  std::size_t n = input.context.empty() ? 0 : input.context.size() - 1;  // separators
  for (const auto& s : input.context) n += s.size();
  return n;
}

std::vector<std::vector<std::size_t>> encode_context(const corpus::Story& story,
                                                     const Vocabulary& vocab) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(story.context.size());
  for (const auto& s : story.context) {
    const auto words = s.words();
    out.push_back(vocab.encode(words));
  }
  return out;
}

std::vector<std::size_t> encode_experience(const extraction::CharacterExperience& exp,
                                           const Vocabulary& vocab) {
  std::vector<std::size_t> ids = vocab.encode(exp.context_words);
  ids.push_back(Vocabulary::kObj);
  for (auto id : vocab.encode(exp.entity_words)) ids.push_back(id);
  return ids;
}

model::ModelInput make_input(const corpus::Story& story, const extraction::ExperienceSequence& seq,
                             const Vocabulary& vocab) {
  model::ModelInput input;
  input.context = encode_context(story, vocab);
  for (const auto& e : seq.experiences) input.character.experiences.push_back(encode_experience(e, vocab));
  input.character.character_token =
      seq.character.mentions.empty() ? Vocabulary::kUnk : vocab.id(seq.character.head_surface());
  return input;
}

std::optional<Example> make_example(const corpus::Story& story, const Vocabulary& vocab,
                                    bool require_sufficient) {
  Example ex;
  ex.story_id = story.id;
  auto gt = extraction::ground_truth_character(story);
  if (gt) {
    auto seq = extraction::build_experience_sequence(story, *gt);
    if (require_sufficient && seq.count() < corpus::kSufficientExperiences) return std::nullopt;
    ex.character_id = gt->canonical_id;
    ex.input = make_input(story, seq, vocab);
  } else {
    if (require_sufficient) return std::nullopt;
    auto subj = extraction::ending_subject(story);
    ex.character_id = subj ? corpus::character_key(*subj) : std::string("<none>");
    ex.input.context = encode_context(story, vocab);
    ex.input.character.character_token = subj ? vocab.id(subj->form) : Vocabulary::kUnk;
  }
  const auto words = story.ending.words();
  ex.target = vocab.encode(words);
  ex.target.push_back(Vocabulary::kEos);
  return ex;
}

}  // namespace coseg::training
