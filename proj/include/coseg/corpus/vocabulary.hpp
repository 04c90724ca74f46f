#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coseg/corpus/story.hpp"
#include "coseg/numerics/tensor.hpp"

namespace coseg::corpus {

/// Token <-> id map. Ids 0..4 are reserved for PAD, UNK, BOS, EOS and the
/// OBJ experience separator; ordinary tokens are lower-cased.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kBos = 2;
  static constexpr std::size_t kEos = 3;
  static constexpr std::size_t kObj = 4;
  static constexpr std::size_t kReservedCount = 5;
  static const std::vector<std::string>& reserved_tokens();

  Vocabulary();

  /// Ordinary tokens sorted by count descending, then lexicographically.
  /// Tokens with count < min_count are left out (they encode to UNK).
  static Vocabulary build(const std::vector<const Story*>& train_stories, std::size_t min_count);

  std::size_t size() const { return tokens_.size(); }
  /// Id of a text word (lower-cased first); UNK when absent. Reserved
  /// entries are never returned.
  std::size_t id(const std::string& word) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t count(std::size_t id) const { return counts_.at(id); }
  bool contains(const std::string& word) const;

  std::vector<std::size_t> encode(std::span<const std::string> words) const;
  std::vector<std::string> decode(std::span<const std::size_t> ids) const;

  /// `token<TAB>id<TAB>count` per line, id order.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_;
  }

 private:
  void push(const std::string& token, std::size_t count);

  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads whitespace-separated `token v1 ... vD` lines. Rows for vocabulary
/// tokens found in the file are copied; the rest are drawn from
/// uniform(-init_scale, init_scale) with the given seed. Throws InputError
/// when a line does not carry exactly `dim` values.
Tensor load_pretrained_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                  std::size_t dim, std::uint64_t seed, double init_scale = 0.08,
                                  std::size_t* found = nullptr);

}  // namespace coseg::corpus
