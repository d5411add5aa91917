#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace phytosub::csv {

using Row = std::vector<std::string>;

// RFC 4180 style parsing: quoted fields, "" escapes, CR/LF tolerant.
// Throws Error{malformed_line} on an unterminated quote.
std::vector<Row> parse(const std::string& text);

std::vector<Row> read_file(const std::filesystem::path& path);

// Quotes a field when it contains a comma, quote, or newline.
std::string format_field(const std::string& field);
std::string format_row(const Row& row);

void write_file(const std::filesystem::path& path, const std::vector<Row>& rows);

}  // namespace phytosub::csv
