#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace xdrs {

std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string_view> split_char(std::string_view s, char sep);
std::vector<std::string_view> split_lines(std::string_view s);
std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// FNV-1a, 64 bit. Stable across platforms; used for config and vocab hashes.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace xdrs
