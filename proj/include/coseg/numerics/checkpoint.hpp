#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "coseg/numerics/tensor.hpp"

namespace coseg {

// On-disk layout (all integers little-endian, floats IEEE-754 binary64 LE):
//
//   magic        8 bytes  "COSEGCKP"
//   version      u32      kCheckpointVersion
//   config_hash  u64      FNV-1a of config_text
//   config_len   u32      then config_len bytes of config_text (UTF-8)
//   block_count  u32
//   per block:
//     name_len   u32      then name_len bytes of name
//     rows       u32
//     cols       u32
//     data       rows*cols f64, row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> blocks;

  std::uint64_t config_hash() const;
  const Tensor* find(const std::string& name) const;
};

/// Throws std::runtime_error on any I/O failure.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws InputError on a bad magic, unsupported version, hash mismatch or
/// truncated file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace coseg
