#include "coseg/corpus/splits.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "coseg/error.hpp"
#include "coseg/numerics/rng.hpp"

namespace coseg::corpus {

namespace {

/// Restores input order for a subset of pool positions.
std::vector<std::string> in_input_order(std::vector<std::size_t> positions,
                                        const std::vector<SplitCandidate>& all) {
  std::sort(positions.begin(), positions.end());
  std::vector<std::string> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(all[p].story_id);
  return out;
}

}  // namespace

Splits build_splits(const std::vector<SplitCandidate>& candidates, const SplitOptions& options) {
  std::set<std::string> seen;
  std::vector<std::size_t> sufficient, inadequate;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!seen.insert(candidates[i].story_id).second) {
      throw InputError("duplicate story id: " + candidates[i].story_id);
    }
    (candidates[i].experience_count >= kSufficientExperiences ? sufficient : inadequate).push_back(i);
  }

  Rng rng(options.seed);
  rng.shuffle(std::span<std::size_t>(sufficient));
  rng.shuffle(std::span<std::size_t>(inadequate));

  Splits out;
  auto take = [](std::vector<std::size_t>& pool, std::size_t& cursor, std::size_t n) {
    n = std::min(n, pool.size() - cursor);
    std::vector<std::size_t> part(pool.begin() + static_cast<long>(cursor),
                                  pool.begin() + static_cast<long>(cursor + n));
    cursor += n;
    return part;
  };

  std::size_t cs = 0;
  out.sufficient_test = in_input_order(take(sufficient, cs, options.test_size), candidates);
  out.validation = in_input_order(take(sufficient, cs, options.validation_size), candidates);
  out.train = in_input_order(take(sufficient, cs, sufficient.size()), candidates);

  std::size_t ci = 0;
  out.inadequate_test = in_input_order(take(inadequate, ci, options.test_size), candidates);
  out.excluded = in_input_order(take(inadequate, ci, inadequate.size()), candidates);

  if (inadequate.empty()) {
    out.warnings.push_back("no story has fewer than 2 experiences; inadequate test set is empty");
  }
  if (out.train.empty()) out.warnings.push_back("training split is empty");
  return out;
}

void write_split_manifest(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (const auto& id : ids) f << nlohmann::json{{"id", id}}.dump() << '\n';
}

std::vector<std::string> read_split_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ids.push_back(nlohmann::json::parse(line).at("id").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ids;
}

}  // namespace coseg::corpus
