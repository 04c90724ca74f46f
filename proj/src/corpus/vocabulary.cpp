#include "coseg/corpus/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "coseg/error.hpp"
#include "coseg/numerics/rng.hpp"
#include "coseg/text.hpp"

namespace coseg::corpus {

const std::vector<std::string>& Vocabulary::reserved_tokens() {
  static const std::vector<std::string> kTokens = {"<pad>", "<unk>", "<bos>", "<eos>", "OBJ"};
  return kTokens;
}

Vocabulary::Vocabulary() {
  for (const auto& t : reserved_tokens()) push(t, 0);
}

void Vocabulary::push(const std::string& token, std::size_t count) {
  index_[token] = tokens_.size();
  tokens_.push_back(token);
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<const Story*>& train_stories, std::size_t min_count) {
  if (train_stories.empty()) throw InputError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> freq;
  auto count_sentence = [&](const Sentence& s) {
    for (const auto& t : s.tokens) ++freq[to_lower(t.form)];
  };
  for (const Story* story : train_stories) {
    for (const auto& s : story->context) count_sentence(s);
    count_sentence(story->ending);
  }
  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(), freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (const auto& [token, n] : entries) {
    if (n < min_count || vocab.index_.count(token)) continue;
    vocab.push(token, n);
  }
  return vocab;
}

std::size_t Vocabulary::id(const std::string& word) const {
  // Reserved entries are never reachable from text; callers insert them by id.
  auto it = index_.find(to_lower(word));
  if (it == index_.end() || it->second < kReservedCount) return kUnk;
  return it->second;
}

bool Vocabulary::contains(const std::string& word) const { return id(word) != kUnk; }

std::vector<std::size_t> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<std::size_t> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const std::size_t> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(token(i));
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    f << tokens_[i] << '\t' << i << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    std::size_t id = 0, count = 0;
    if (cols.size() != 3 ||
        std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), id).ec != std::errc() ||
        std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), count).ec != std::errc()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected token<TAB>id<TAB>count");
    }
    if (id < kReservedCount) {
      if (cols[0] != reserved_tokens()[id]) {
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": reserved id " +
                         std::to_string(id) + " must be " + reserved_tokens()[id]);
      }
      continue;
    }
    if (id != vocab.size()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": ids must be consecutive");
    }
    vocab.push(cols[0], count);
  }
  return vocab;
}

Tensor load_pretrained_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                  std::size_t dim, std::uint64_t seed, double init_scale,
                                  std::size_t* found) {
  Rng rng(seed);
  Tensor table(vocab.size(), dim);
  for (double& v : table.data()) v = rng.uniform(-init_scale, init_scale);

  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  std::vector<bool> seen(vocab.size(), false);
  std::size_t hits = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> values;
    double v = 0.0;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (values.size() != dim) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": embedding dimension " +
                       std::to_string(values.size()) + " does not match configured " +
                       std::to_string(dim));
    }
    const std::size_t id = vocab.id(token);
    if (id < Vocabulary::kReservedCount || seen[id]) continue;
    seen[id] = true;
    ++hits;
    std::copy(values.begin(), values.end(), table.row(id).begin());
  }
  if (found) *found = hits;
  return table;
}

}  // namespace coseg::corpus
