#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coseg/model/config.hpp"
#include "coseg/model/vbf.hpp"
#include "coseg/numerics/lstm.hpp"
#include "coseg/numerics/parameters.hpp"
#include "coseg/numerics/tape.hpp"

namespace coseg::model {

/// Token ids of one character's experiences, plus the character token used
/// when there are no experiences at all.
struct CharacterInput {
  std::vector<std::vector<std::size_t>> experiences;
  std::size_t character_token = 0;
};

/// Everything the network conditions on for one (story, character) pair.
struct ModelInput {
  std::vector<std::vector<std::size_t>> context;  // one id list per sentence
  CharacterInput character;
};

struct ContextState {
  std::vector<Var> states;  // one hidden state per context token and separator
  Var final_state;
};

struct CharacterRepresentation {
  Var vector;
  std::size_t experiences = 0;
  /// True when S = 0 and the representation is the projected character
  /// token embedding.
  bool fallback = false;
  /// Final hidden state after each experience.
  std::vector<Var> per_experience;
};

struct DecodeResult {
  std::vector<std::size_t> tokens;
  std::vector<Var> logits;
  std::vector<std::vector<double>> distributions;
};

/// Context encoder, character modelling module (CMM), fusion (VBF + C-CA,
/// or the ADD/CAT ablations) and decoder.
class CosegModel {
 public:
  CosegModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  /// Overwrites the embedding table (e.g. with pretrained vectors).
  void set_embeddings(const Tensor& table);

  /// One LSTM pass over the sentences joined by EOS separators.
  /// Throws std::invalid_argument for an empty context.
  ContextState encode_context(Tape& tape, const std::vector<std::vector<std::size_t>>& sentences);

  /// Chained encoding: experience s+1 starts from the final (h, c) of
  /// experience s; the first starts from zeros. S = 0 takes the fallback
  /// projection of the character token embedding.
  CharacterRepresentation run_cmm(Tape& tape, const CharacterInput& character);

  /// Decoder initial state r from the character and context vectors.
  Var fuse(Tape& tape, Var character, Var context);

  /// VBF candidates and C-CA weights, for inspection. Only valid in VBF mode.
  AttentionResult attend(Tape& tape, Var character, Var context);

  /// Feeds BOS, target[0..T-2] and returns T next-token logits.
  DecodeResult decode_teacher_forced(Tape& tape, Var initial, std::span<const std::size_t> target);

  /// Greedy decoding from BOS, stopping after EOS or `max_len` tokens.
  /// Throws std::invalid_argument for max_len < 1.
  DecodeResult decode_greedy(Tape& tape, Var initial, std::size_t max_len);

  /// encode_context -> run_cmm -> fuse.
  Var condition(Tape& tape, const ModelInput& input, bool* fallback = nullptr);

  /// Summed negative log-likelihood of `target` (EOS-terminated).
  Var nll(Tape& tape, const ModelInput& input, std::span<const std::size_t> target);

  /// Greedy ending for `input`; `fallback` reports the S = 0 path.
  std::vector<std::size_t> generate(const ModelInput& input, std::size_t max_len,
                                    bool* fallback = nullptr);

 private:
  Var character_vector(const CharacterRepresentation& rep) const;
  Var embed(Tape& tape, std::size_t token);
  Var output_logits(Tape& tape, Var hidden);

  ModelConfig config_;
  ParameterStore params_;
  Parameter* embedding_ = nullptr;
  LstmCell encoder_;
  LstmCell cmm_;
  LstmCell decoder_;
  Parameter* fallback_w_ = nullptr;
  Parameter* fallback_b_ = nullptr;
  Parameter* attn_w_ = nullptr;
  Parameter* attn_b_ = nullptr;
  Parameter* cat_w_ = nullptr;
  Parameter* cat_b_ = nullptr;
  Parameter* out_w_ = nullptr;
  Parameter* out_b_ = nullptr;
};

}  // namespace coseg::model
