#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coseg/corpus/dependency.hpp"

namespace coseg::corpus {

/// A subject occurrence of a character.
struct Mention {
  std::size_t sentence = 0;
  std::size_t token = 0;  // 0-based position in the sentence
  std::string surface;

  bool operator==(const Mention&) const = default;
};

struct Character {
  std::string canonical_id;
  std::vector<Mention> mentions;
  /// Context sentences (0-based, strictly increasing) where the character is
  /// the subject of the root.
  std::vector<std::size_t> sentence_indices;

  /// Lower-cased surface forms of every mention.
  std::set<std::string> surface_forms() const;
  /// Surface of the first mention, used as the character token.
  const std::string& head_surface() const { return mentions.front().surface; }

  bool operator==(const Character&) const = default;
};

struct Story {
  std::string id;
  std::vector<Sentence> context;
  Sentence ending;
  /// Filled by identify_characters(); empty until then.
  std::vector<Character> characters;

  std::size_t context_token_count() const;
  const Character* find_character(const std::string& canonical_id) const;
};

/// Parses one JSONL record:
///   {"id": "...", "context": [S, ...], "ending": S}
/// where each sentence S is an array of tokens
///   [index, form, lemma, upos, head, deprel].
/// Throws InputError (with `where`) on a schema or parse violation.
Story parse_story_json(const std::string& line, const std::string& where);
std::string story_to_json(const Story& story);

std::vector<Story> read_stories_jsonl(std::istream& in, const std::string& source);
std::vector<Story> load_stories_jsonl(const std::filesystem::path& path);
void write_stories_jsonl(std::ostream& out, const std::vector<Story>& stories);

/// Groups CoNLL-U sentences into stories. A `# newdoc id = X` (or
/// `# story_id = X`) comment opens a story; its last sentence is the ending
/// and the preceding ones are the context.
std::vector<Story> stories_from_conllu(const std::vector<ConlluSentence>& sentences,
                                       const std::string& source);

}  // namespace coseg::corpus
