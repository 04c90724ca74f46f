#include "coseg/numerics/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <stdexcept>

#include "coseg/error.hpp"
#include "coseg/numerics/rng.hpp"

namespace coseg {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'O', 'S', 'E', 'G', 'C', 'K', 'P'};

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

void put_bytes(std::string& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(std::string data, std::string source) : data_(std::move(data)), source_(std::move(source)) {}

  template <typename U>
  U get_le() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw InputError(source_ + ": truncated checkpoint");
  }
  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t Checkpoint::config_hash() const { return fnv1a(config_text); }

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : blocks) {
    if (n == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::string out(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, ckpt.config_hash());
  put_bytes(out, ckpt.config_text);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.blocks.size()));
  for (const auto& [name, t] : ckpt.blocks) {
    put_bytes(out, name);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols()));
    for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open checkpoint: " + path.string());
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader in(std::move(data), path.string());

  if (in.get_bytes(kMagic.size()) != std::string(kMagic.begin(), kMagic.end())) {
    throw InputError(path.string() + ": not a checkpoint (bad magic)");
  }
  const auto version = in.get_le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw InputError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto hash = in.get_le<std::uint64_t>();
  Checkpoint ckpt;
  ckpt.config_text = in.get_bytes(in.get_le<std::uint32_t>());
  if (ckpt.config_hash() != hash) throw InputError(path.string() + ": config hash mismatch");

  const auto count = in.get_le<std::uint32_t>();
  for (std::uint32_t b = 0; b < count; ++b) {
    std::string name = in.get_bytes(in.get_le<std::uint32_t>());
    const auto rows = in.get_le<std::uint32_t>();
    const auto cols = in.get_le<std::uint32_t>();
    Tensor t(rows, cols);
    for (double& v : t.data()) v = std::bit_cast<double>(in.get_le<std::uint64_t>());
    ckpt.blocks.emplace_back(std::move(name), std::move(t));
  }
  if (!in.at_end()) throw InputError(path.string() + ": trailing bytes after last block");
  return ckpt;
}

}  // namespace coseg
