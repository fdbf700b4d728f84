#pragma once

#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mergemine {

bool is_hex_sha(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view text);

std::string lower_copy(std::string_view s);

// Parses "YYYY-MM-DDTHH:MM:SSZ" (UTC). Returns nullopt on malformed input.
std::optional<std::time_t> parse_iso8601_utc(std::string_view s);
std::string format_iso8601_utc(std::time_t t);

// Offset of the first invalid UTF-8 byte, or nullopt if the buffer decodes.
std::optional<std::size_t> find_invalid_utf8(std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace mergemine
