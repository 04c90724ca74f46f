#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace coseg::corpus {

/// Minimum experience count of the ground-truth character for a story to
/// count as "sufficient".
inline constexpr std::size_t kSufficientExperiences = 2;

struct SplitCandidate {
  std::string story_id;
  /// Experiences of the ground-truth-ending character (0 when that
  /// character never appears in the context).
  std::size_t experience_count = 0;
};

struct SplitOptions {
  std::size_t test_size = 3073;
  std::size_t validation_size = 1000;
  std::uint64_t seed = 7;
};

/// Each list holds story ids in input order.
struct Splits {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> sufficient_test;
  std::vector<std::string> inadequate_test;
  /// Inadequate stories beyond `test_size`; never trained on.
  std::vector<std::string> excluded;
  std::vector<std::string> warnings;
};

/// Sufficient pool (count >= 2) is shuffled with the seed and cut into
/// sufficient_test, validation and train; the inadequate pool (count < 2)
/// is shuffled and cut into inadequate_test and excluded. Sizes are capped
/// by the pool sizes.
Splits build_splits(const std::vector<SplitCandidate>& candidates, const SplitOptions& options);

/// One `{"id": ...}` object per line.
void write_split_manifest(const std::filesystem::path& path, const std::vector<std::string>& ids);
std::vector<std::string> read_split_manifest(const std::filesystem::path& path);

}  // namespace coseg::corpus
