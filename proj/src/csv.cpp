#include "phytosub/csv.hpp"

#include "phytosub/error.hpp"
#include "phytosub/io.hpp"

namespace phytosub::csv {

std::vector<Row> parse(const std::string& text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line_no = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line_no;
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (in_quotes) {
    throw Error(Errc::malformed_line,
                "unterminated quoted field at line " + std::to_string(line_no));
  }
  if (!field.empty() || field_started || !row.empty()) {
    end_row();
  }
  return rows;
}

std::vector<Row> read_file(const std::filesystem::path& path) {
  return parse(io::read_text(path));
}

std::string format_field(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += format_field(row[i]);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::vector<Row>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += format_row(row);
    out.push_back('\n');
  }
  io::write_text(path, out);
}

}  // namespace phytosub::csv
