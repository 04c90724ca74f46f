#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace coseg::evaluation {

using Tokens = std::vector<std::string>;

enum class BleuMode {
  /// Brevity penalty times the geometric mean of modified 1..n-gram
  /// precisions (corpus-level BLEU-n).
  Cumulative,
  /// Brevity penalty times the modified n-gram precision alone.
  Individual,
};

/// Corpus-level counts for one n-gram order.
struct NgramStats {
  std::size_t matched = 0;  // clipped
  std::size_t total = 0;
};

struct BleuStats {
  std::vector<NgramStats> orders;  // index i holds (i+1)-grams
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  double brevity_penalty() const;
  double precision(std::size_t n) const;
};

/// Accumulates clipped n-gram matches for orders 1..max_n over aligned
/// candidate/reference lists (one reference per candidate).
BleuStats bleu_stats(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                     std::size_t max_n);

/// BLEU-n as a percentage in [0, 100]. No smoothing: any zero precision up
/// to n gives 0. Throws std::invalid_argument on an empty corpus, mismatched
/// list lengths or n outside 1..4.
double bleu_n(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
              std::size_t n, BleuMode mode = BleuMode::Cumulative);

}  // namespace coseg::evaluation
