#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace phytosub::io {

// Reads a whole file; throws Error{io_failure} when unreadable.
std::string read_text(const std::filesystem::path& path);

// Writes a whole file (UTF-8, as given); throws Error{io_failure}.
void write_text(const std::filesystem::path& path, const std::string& content);

// Splits on '\n'. A trailing newline does not produce a final empty line;
// embedded "\r" before the newline is stripped.
std::vector<std::string> split_lines(const std::string& text);

// read_text + split_lines.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// FNV-1a 64-bit hash, lowercase hex. Used for prompt keys and config hashes.
std::string fnv1a64_hex(std::string_view data);

}  // namespace phytosub::io
