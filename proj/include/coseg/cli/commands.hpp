#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coseg/corpus/story.hpp"
#include "coseg/corpus/vocabulary.hpp"
#include "coseg/evaluation/bleu.hpp"

namespace coseg::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Split names used for the manifest files `split_<name>.jsonl`.
inline const std::vector<std::string> kSplitNames = {"train", "validation", "sufficient_test",
                                                     "inadequate_test", "excluded"};

/// Default seed: COSEG_SEED if set, else `fallback`.
std::uint64_t default_seed(std::uint64_t fallback);

/// Output directory of `prepare`, loaded back with characters identified.
struct PreparedData {
  fs::path dir;
  std::vector<corpus::Story> stories;
  corpus::Vocabulary vocab;
  std::map<std::string, std::vector<std::string>> splits;

  static PreparedData load(const fs::path& dir);
  /// Stories of a split in manifest order. Throws InputError for an
  /// unknown split or story id.
  std::vector<const corpus::Story*> split(const std::string& name) const;
  const corpus::Story* find(const std::string& story_id) const;
};

struct PrepareOptions {
  std::optional<fs::path> stories;  // JSONL
  std::optional<fs::path> conllu;
  fs::path out;
  std::uint64_t seed = 7;
  std::size_t test_size = 3073;
  std::size_t validation_size = 1000;
  std::size_t min_count = 2;
};
int cmd_prepare(const PrepareOptions& options, std::ostream& log);

struct ExtractOptions {
  fs::path stories;
  fs::path out;
};
int cmd_extract(const ExtractOptions& options, std::ostream& log);

struct TrainOptions {
  std::optional<fs::path> config;
  fs::path data;
  fs::path out;
  std::optional<std::string> fusion;
  /// Breakpoints expressed against `reference_dim` ("0-128-256-384-512").
  std::optional<std::string> breakpoints;
  std::size_t reference_dim = 512;
  std::optional<std::size_t> hidden_dim;
  std::optional<std::size_t> embed_dim;
  std::optional<std::size_t> epochs;
  std::optional<fs::path> embeddings;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  bool resume = false;
};
int cmd_train(const TrainOptions& options, std::ostream& log);

struct GenerateOptions {
  fs::path checkpoint;
  fs::path data;
  std::optional<std::string> story_id;
  bool all = false;
  std::optional<std::string> character;
  std::optional<fs::path> out;
  std::optional<std::size_t> max_len;
};
int cmd_generate(const GenerateOptions& options, std::ostream& log);

struct EvaluateOptions {
  fs::path checkpoint;
  fs::path data;
  std::vector<std::string> splits = {"sufficient_test", "inadequate_test"};
  fs::path out;  // metrics CSV
  std::optional<fs::path> generations;
  std::string model_name = "coseg";
  evaluation::BleuMode bleu_mode = evaluation::BleuMode::Cumulative;
};
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);

struct AblateOptions {
  std::vector<std::string> combinations = {"0", "128", "256", "0-256-512", "0-128-256-384-512"};
  std::size_t reference_dim = 512;
  fs::path data;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::size_t> hidden_dim;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
};
int cmd_ablate(const AblateOptions& options, std::ostream& log);

/// One row of the ablation table.
struct AblationRow {
  std::size_t rank = 0;
  std::string combination;  // as given, reference scale
  std::string scaled;       // at the trained hidden size
  double val_ppl = 0.0;
  double bleu1 = 0.0;
  double bleu2 = 0.0;
  std::size_t epochs = 0;
};
std::vector<AblationRow> read_ablation_csv(const fs::path& path);

}  // namespace coseg::cli
