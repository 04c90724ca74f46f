#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coseg::corpus {

/// One word of a dependency parse. `index` is 1-based; `head` is the
/// 1-based index of the governor, 0 for the root.
struct DependencyToken {
  int index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  int head = 0;
  std::string deprel;

  bool operator==(const DependencyToken&) const = default;
};

/// A parsed sentence. Tokens are stored in surface order, token i has
/// index i + 1.
struct Sentence {
  std::vector<DependencyToken> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> words() const;
  /// Position (0-based) of the root token.
  std::size_t root() const;
  /// Positions of the direct dependents of token at position `pos`.
  std::vector<std::size_t> dependents(std::size_t pos) const;

  bool operator==(const Sentence&) const = default;
};

/// Checks index continuity, head range, a single root and acyclicity.
/// Throws InputError naming the offending token.
void validate_sentence(const Sentence& sentence, const std::string& where);

struct ConlluSentence {
  Sentence sentence;
  /// `# key = value` comment lines preceding the sentence, in order.
  std::vector<std::pair<std::string, std::string>> comments;
  /// Line where the block starts, comments included.
  std::size_t first_line = 0;

  std::optional<std::string> comment(const std::string& key) const;
};

/// Reads 10-column CoNLL-U. Multiword ranges (1-2) and empty nodes (1.1)
/// are skipped. Malformed lines raise InputError with the line number;
/// structurally invalid sentences (bad head, cycle, no root) raise
/// InputError naming the token.
std::vector<ConlluSentence> parse_conllu(std::istream& in, const std::string& source);
std::vector<ConlluSentence> load_conllu(const std::filesystem::path& path);

}  // namespace coseg::corpus
