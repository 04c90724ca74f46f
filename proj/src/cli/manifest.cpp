#include "coseg/cli/manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "coseg/error.hpp"
#include "coseg/numerics/rng.hpp"

namespace coseg::cli {

std::int64_t timestamp_now() {
  if (const char* fixed = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      return std::stoll(fixed);
    } catch (const std::exception&) {
      throw InputError(std::string("SOURCE_DATE_EPOCH is not an integer: ") + fixed);
    }
  }
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  return fnv1a(bytes);
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), hash_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) { outputs.push_back(path.string()); }

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) j["config"][k] = v;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [p, h] : inputs) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    j["inputs"].push_back({{"path", p}, {"fnv1a", hex}});
  }
  j["outputs"] = outputs;
  j["started"] = started;
  j["finished"] = finished;
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace coseg::cli
