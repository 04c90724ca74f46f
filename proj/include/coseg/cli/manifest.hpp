#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coseg/config_file.hpp"

namespace coseg::cli {

/// Provenance record written next to the artifacts of one command.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  KeyValues config;
  /// Input path and FNV-1a hash of its bytes.
  std::vector<std::pair<std::string, std::uint64_t>> inputs;
  std::vector<std::string> outputs;
  /// Seconds since the epoch; SOURCE_DATE_EPOCH when set.
  std::int64_t started = 0;
  std::int64_t finished = 0;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

std::int64_t timestamp_now();
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace coseg::cli
