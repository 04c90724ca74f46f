#include "coseg/model/config.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coseg/text.hpp"

namespace coseg::model {

std::string to_string(Fusion f) {
  switch (f) {
    case Fusion::Vbf: return "vbf";
    case Fusion::Add: return "add";
    case Fusion::Cat: return "cat";
  }
  return "?";
}

Fusion parse_fusion(const std::string& s) {
  const std::string v = to_lower(s);
  if (v == "vbf") return Fusion::Vbf;
  if (v == "add") return Fusion::Add;
  if (v == "cat") return Fusion::Cat;
  throw std::invalid_argument("unknown fusion mode '" + s + "' (expected vbf, add or cat)");
}

std::string to_string(CharacterState s) {
  return s == CharacterState::Final ? "final" : "mean";
}

CharacterState parse_character_state(const std::string& s) {
  const std::string v = to_lower(s);
  if (v == "final") return CharacterState::Final;
  if (v == "mean") return CharacterState::Mean;
  throw std::invalid_argument("unknown character_state '" + s + "' (expected final or mean)");
}

std::vector<std::size_t> parse_breakpoints(const std::string& spec, std::size_t hidden_dim) {
  if (to_lower(spec) == "all") {
    std::vector<std::size_t> all(hidden_dim + 1);
    for (std::size_t k = 0; k <= hidden_dim; ++k) all[k] = k;
    return all;
  }
  std::vector<std::size_t> out;
  for (const auto& part : split(spec, '-')) out.push_back(parse_size(part, "breakpoints"));
  return out;
}

std::string format_breakpoints(const std::vector<std::size_t>& breakpoints) {
  std::vector<std::string> parts;
  for (auto k : breakpoints) parts.push_back(std::to_string(k));
  return join(parts, "-");
}

std::vector<std::size_t> scale_breakpoints(const std::vector<std::size_t>& positions,
                                           std::size_t reference_dim, std::size_t hidden_dim) {
  if (reference_dim == 0) throw std::invalid_argument("reference dimension must be positive");
  std::vector<std::size_t> out;
  for (auto k : positions) {
    if (k > reference_dim) {
      throw std::invalid_argument("breakpoint " + std::to_string(k) + " exceeds dimension " +
                                  std::to_string(reference_dim));
    }
    out.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * static_cast<double>(hidden_dim) /
                     static_cast<double>(reference_dim))));
  }
  return out;
}

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.embed_dim = 200;
  c.hidden_dim = 512;
  c.breakpoints = {0, 128, 256, 384, 512};
  return c;
}

void ModelConfig::validate() const {
  if (embed_dim == 0) throw std::invalid_argument("embed_dim must be positive");
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
  if (max_decode_len == 0) throw std::invalid_argument("max_decode_len must be >= 1");
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
  if (fusion == Fusion::Vbf) {
    if (breakpoints.empty()) throw std::invalid_argument("breakpoints must not be empty");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      if (breakpoints[i] > hidden_dim) {
        throw std::invalid_argument("breakpoint " + std::to_string(breakpoints[i]) +
                                    " exceeds hidden_dim " + std::to_string(hidden_dim));
      }
      if (i > 0 && breakpoints[i] <= breakpoints[i - 1]) {
        throw std::invalid_argument("breakpoints must be strictly increasing");
      }
    }
  }
}

void ModelConfig::write(KeyValues& kv) const {
  kv["embed_dim"] = std::to_string(embed_dim);
  kv["hidden_dim"] = std::to_string(hidden_dim);
  kv["breakpoints"] = format_breakpoints(breakpoints);
  kv["fusion"] = to_string(fusion);
  kv["vocab_size"] = std::to_string(vocab_size);
  kv["max_decode_len"] = std::to_string(max_decode_len);
  kv["character_state"] = to_string(character_state);
  kv["init_scale"] = format_double(init_scale);
}

ModelConfig ModelConfig::read(const KeyValues& kv) {
  ModelConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("embed_dim")) c.embed_dim = parse_size(*v, "embed_dim");
  if (auto v = get("hidden_dim")) c.hidden_dim = parse_size(*v, "hidden_dim");
  if (auto v = get("breakpoints")) {
    c.breakpoints = parse_breakpoints(*v, c.hidden_dim);
  } else {
    c.breakpoints = scale_breakpoints({0, 16, 32, 48, 64}, 64, c.hidden_dim);
  }
  if (auto v = get("fusion")) c.fusion = parse_fusion(*v);
  if (auto v = get("vocab_size")) c.vocab_size = parse_size(*v, "vocab_size");
  if (auto v = get("max_decode_len")) c.max_decode_len = parse_size(*v, "max_decode_len");
  if (auto v = get("character_state")) c.character_state = parse_character_state(*v);
  if (auto v = get("init_scale")) c.init_scale = parse_double(*v, "init_scale");
  return c;
}

}  // namespace coseg::model
