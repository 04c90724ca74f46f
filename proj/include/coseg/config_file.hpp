#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

namespace coseg {

/// `key = value` lines; `#` starts a comment; blank lines ignored. Later
/// keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& source);
KeyValues load_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);

/// Strict conversions; throw std::invalid_argument naming `key`.
std::size_t parse_size(const std::string& s, const std::string& key);
double parse_double(const std::string& s, const std::string& key);
/// Shortest round-trip representation.
std::string format_double(double v);

}  // namespace coseg
