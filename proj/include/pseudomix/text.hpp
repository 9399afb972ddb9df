#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pseudomix::text {

using Tokens = std::vector<std::string>;

// Position of the first invalid byte, or npos for valid UTF-8.
std::size_t find_invalid_utf8(std::string_view s);

// Byte length of each code point, assuming valid UTF-8.
std::vector<std::string> split_code_points(std::string_view s);

Tokens split_whitespace(std::string_view s);
std::string join(const Tokens& tokens, std::string_view sep = " ");

// Trim and collapse internal whitespace runs to one space.
std::string normalize_whitespace(std::string_view s);

// Reads LF-separated lines (a trailing CR is kept, a final newline does not
// start an empty line). Throws IoError if the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace pseudomix::text
