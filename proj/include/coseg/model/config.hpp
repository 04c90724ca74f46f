#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coseg/config_file.hpp"

namespace coseg::model {

enum class Fusion { Vbf, Add, Cat };

/// Which CMM state conditions the attention and fusion: the state after the
/// last experience, or the mean of the per-experience final states.
enum class CharacterState { Final, Mean };

std::string to_string(Fusion f);
Fusion parse_fusion(const std::string& s);
std::string to_string(CharacterState s);
CharacterState parse_character_state(const std::string& s);

/// "0-16-32-48-64" or "all" (every position 0..hidden_dim).
std::vector<std::size_t> parse_breakpoints(const std::string& spec, std::size_t hidden_dim);
std::string format_breakpoints(const std::vector<std::size_t>& breakpoints);

/// Maps positions expressed against `reference_dim` onto `hidden_dim`,
/// rounding to nearest, e.g. 0-128-256-384-512 @512 -> 0-16-32-48-64 @64.
/// Throws std::invalid_argument for a position above `reference_dim`.
std::vector<std::size_t> scale_breakpoints(const std::vector<std::size_t>& positions,
                                           std::size_t reference_dim, std::size_t hidden_dim);

struct ModelConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::vector<std::size_t> breakpoints = {0, 16, 32, 48, 64};
  Fusion fusion = Fusion::Vbf;
  std::size_t vocab_size = 0;
  std::size_t max_decode_len = 24;
  CharacterState character_state = CharacterState::Final;
  double init_scale = 0.08;

  /// 512 hidden, 200-d embeddings, breakpoints 0-128-256-384-512.
  static ModelConfig paper_scale();

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  void write(KeyValues& kv) const;
  /// Reads known keys, leaving defaults for absent ones. A missing
  /// `breakpoints` key is scaled from the default to `hidden_dim`.
  static ModelConfig read(const KeyValues& kv);
};

}  // namespace coseg::model
