#include "coseg/evaluation/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace coseg::evaluation {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i + n))];
  }
  return counts;
}

}  // namespace

double BleuStats::brevity_penalty() const {
  if (candidate_length == 0) return 0.0;
  if (candidate_length > reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(candidate_length));
}

double BleuStats::precision(std::size_t n) const {
  const NgramStats& s = orders.at(n - 1);
  return s.total == 0 ? 0.0 : static_cast<double>(s.matched) / static_cast<double>(s.total);
}

BleuStats bleu_stats(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                     std::size_t max_n) {
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("bleu: candidate and reference counts differ");
  }
  BleuStats stats;
  stats.orders.resize(max_n);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    stats.candidate_length += candidates[i].size();
    stats.reference_length += references[i].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const NgramCounts cand = count_ngrams(candidates[i], n);
      const NgramCounts ref = count_ngrams(references[i], n);
      for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        const std::size_t clip = it == ref.end() ? 0 : it->second;
        stats.orders[n - 1].matched += std::min(count, clip);
        stats.orders[n - 1].total += count;
      }
    }
  }
  return stats;
}

double bleu_n(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
              std::size_t n, BleuMode mode) {
  if (candidates.empty()) throw std::invalid_argument("bleu: empty corpus");
  if (n < 1 || n > 4) throw std::invalid_argument("bleu: n must be in 1..4");
  const BleuStats stats = bleu_stats(candidates, references, n);
  const double bp = stats.brevity_penalty();

  if (mode == BleuMode::Individual) return 100.0 * bp * stats.precision(n);

  double log_sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double p = stats.precision(i);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(n));
}

}  // namespace coseg::evaluation
