#include "coseg/model/coseg_model.hpp"

#include <stdexcept>

#include "coseg/corpus/vocabulary.hpp"
#include "coseg/error.hpp"
#include "coseg/numerics/ops.hpp"
#include "coseg/numerics/rng.hpp"

namespace coseg::model {

using corpus::Vocabulary;

CosegModel::CosegModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  if (config_.vocab_size <= Vocabulary::kReservedCount) {
    throw std::invalid_argument("vocab_size must exceed the reserved token count");
  }
  const std::size_t V = config_.vocab_size, D = config_.embed_dim, H = config_.hidden_dim;
  embedding_ = &params_.add("embedding", V, D);
  encoder_ = LstmCell(params_, "encoder", D, H);
  cmm_ = LstmCell(params_, "cmm", D, H);
  fallback_w_ = &params_.add("fallback.W", H, D);
  fallback_b_ = &params_.add("fallback.b", H, 1);
  switch (config_.fusion) {
    case Fusion::Vbf:
      attn_w_ = &params_.add("attention.W", config_.breakpoints.size(), 2 * H);
      attn_b_ = &params_.add("attention.b", config_.breakpoints.size(), 1);
      break;
    case Fusion::Cat:
      cat_w_ = &params_.add("cat.W", H, 2 * H);
      cat_b_ = &params_.add("cat.b", H, 1);
      break;
    case Fusion::Add:
      break;
  }
  decoder_ = LstmCell(params_, "decoder", D, H);
  out_w_ = &params_.add("output.W", V, H);
  out_b_ = &params_.add("output.b", V, 1);

  Rng rng(seed);
  params_.init_uniform(rng, config_.init_scale);
}

void CosegModel::set_embeddings(const Tensor& table) {
  if (!table.same_shape(embedding_->value)) {
    throw ShapeError("embedding table " + table.shape_string() + " does not match " +
                     embedding_->value.shape_string());
  }
  embedding_->value = table;
}

Var CosegModel::embed(Tape& tape, std::size_t token) {
  return lookup(tape.param(*embedding_), token);
}

Var CosegModel::output_logits(Tape& tape, Var hidden) {
  return add(matvec(tape.param(*out_w_), hidden), tape.param(*out_b_));
}

ContextState CosegModel::encode_context(Tape& tape,
                                        const std::vector<std::vector<std::size_t>>& sentences) {
  std::size_t total = 0;
  for (const auto& s : sentences) total += s.size();
  if (total == 0) throw std::invalid_argument("encode_context: empty context");

  ContextState out;
  LstmState state = zero_state(tape, config_.hidden_dim);
  auto feed = [&](std::size_t token) {
    state = lstm_step(encoder_, embed(tape, token), state.h, state.c);
    out.states.push_back(state.h);
  };
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) feed(Vocabulary::kEos);
    for (auto token : sentences[i]) feed(token);
  }
  out.final_state = state.h;
  return out;
}

CharacterRepresentation CosegModel::run_cmm(Tape& tape, const CharacterInput& character) {
  CharacterRepresentation rep;
  rep.experiences = character.experiences.size();
  if (character.experiences.empty()) {
    rep.fallback = true;
    rep.vector = add(matvec(tape.param(*fallback_w_), embed(tape, character.character_token)),
                     tape.param(*fallback_b_));
    return rep;
  }
  LstmState state = zero_state(tape, config_.hidden_dim);
  for (const auto& experience : character.experiences) {
    if (experience.empty()) throw std::invalid_argument("run_cmm: empty experience");
    // Carrying both h and c realises the chained initialisation.
    for (auto token : experience) state = lstm_step(cmm_, embed(tape, token), state.h, state.c);
    rep.per_experience.push_back(state.h);
  }
  rep.vector = state.h;
  return rep;
}

Var CosegModel::character_vector(const CharacterRepresentation& rep) const {
  if (rep.fallback || config_.character_state == CharacterState::Final) return rep.vector;
  return scale(add_n(rep.per_experience), 1.0 / static_cast<double>(rep.per_experience.size()));
}

AttentionResult CosegModel::attend(Tape& tape, Var character, Var context) {
  if (config_.fusion != Fusion::Vbf) throw std::logic_error("attend: model is not in VBF mode");
  auto candidates = vbf_interact(character, context, config_.breakpoints);
  return cca_attend(character, context, candidates, tape.param(*attn_w_), tape.param(*attn_b_));
}

Var CosegModel::fuse(Tape& tape, Var character, Var context) {
  switch (config_.fusion) {
    case Fusion::Vbf:
      return attend(tape, character, context).fused;
    case Fusion::Add:
      return add(character, context);
    case Fusion::Cat:
      return add(matvec(tape.param(*cat_w_), concat(character, context)), tape.param(*cat_b_));
  }
  throw std::logic_error("fuse: unknown fusion mode");
}

DecodeResult CosegModel::decode_teacher_forced(Tape& tape, Var initial,
                                               std::span<const std::size_t> target) {
  if (initial.value().size() != config_.hidden_dim) {
    throw ShapeError("decode: initial state must have length hidden_dim");
  }
  DecodeResult out;
  LstmState state{initial, initial};
  std::size_t prev = Vocabulary::kBos;
  for (auto token : target) {
    state = lstm_step(decoder_, embed(tape, prev), state.h, state.c);
    Var logits = output_logits(tape, state.h);
    out.logits.push_back(logits);
    out.distributions.push_back(softmax(logits.value().data()));
    out.tokens.push_back(token);
    prev = token;
  }
  return out;
}

DecodeResult CosegModel::decode_greedy(Tape& tape, Var initial, std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("decode: max_len must be >= 1");
  if (initial.value().size() != config_.hidden_dim) {
    throw ShapeError("decode: initial state must have length hidden_dim");
  }
  DecodeResult out;
  LstmState state{initial, initial};
  std::size_t prev = Vocabulary::kBos;
  while (out.tokens.size() < max_len) {
    state = lstm_step(decoder_, embed(tape, prev), state.h, state.c);
    Var logits = output_logits(tape, state.h);
    const std::size_t next = argmax(logits.value().data());
    out.logits.push_back(logits);
    out.distributions.push_back(softmax(logits.value().data()));
    out.tokens.push_back(next);
    if (next == Vocabulary::kEos) break;
    prev = next;
  }
  return out;
}

Var CosegModel::condition(Tape& tape, const ModelInput& input, bool* fallback) {
  ContextState ctx = encode_context(tape, input.context);
  CharacterRepresentation rep = run_cmm(tape, input.character);
  if (fallback) *fallback = rep.fallback;
  return fuse(tape, character_vector(rep), ctx.final_state);
}

Var CosegModel::nll(Tape& tape, const ModelInput& input, std::span<const std::size_t> target) {
  if (target.empty()) throw std::invalid_argument("nll: empty target");
  Var r = condition(tape, input);
  DecodeResult dec = decode_teacher_forced(tape, r, target);
  std::vector<Var> losses;
  losses.reserve(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) losses.push_back(cross_entropy(dec.logits[t], target[t]));
  return add_n(losses);
}

std::vector<std::size_t> CosegModel::generate(const ModelInput& input, std::size_t max_len,
                                              bool* fallback) {
  Tape tape;
  Var r = condition(tape, input, fallback);
  return decode_greedy(tape, r, max_len).tokens;
}

}  // namespace coseg::model
