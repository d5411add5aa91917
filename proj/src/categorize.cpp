#include "phytosub/categorize.hpp"

#include <algorithm>
#include <map>

#include "phytosub/csv.hpp"
#include "phytosub/error.hpp"
#include "phytosub/io.hpp"
#include "phytosub/normalize.hpp"

namespace phytosub::categorize {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  const char* ws = " \t\n\r";
  auto start = s.find_first_not_of(ws);
  if (start == std::string_view::npos) return {};
  auto end = s.find_last_not_of(ws);
  return std::string(s.substr(start, end - start + 1));
}

}  // namespace

const std::array<const char*, kCategoryCount>& category_names() {
  static const std::array<const char*, kCategoryCount> names = {
      "Herbs and Spices",
      "Fats and Oils",
      "Unclassified",
      "Baby Foods",
      "Snack Foods",
      "Dishes",
      "Baking Goods",
      "Confectioneries",
      "Eggs",
      "Milk and Milk Products",
      "Animal Foods",
      "Aquatic Foods",
      "Beverages",
      "Cocoa and Cocoa Products",
      "Soy",
      "Coffee and Coffee Products",
      "Gourds",
      "Teas",
      "Pulses",
      "Cereals and Cereal Products",
      "Nuts",
      "Fruits",
      "Vegetables",
  };
  return names;
}

const char* to_string(FoodCategory category) {
  return category_names()[static_cast<std::size_t>(category)];
}

std::optional<FoodCategory> category_from_exact(std::string_view name) {
  const auto& names = category_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (name == names[i]) return static_cast<FoodCategory>(i);
  }
  return std::nullopt;
}

gateway::MessageList build_category_prompt(const std::string& normalized_name) {
  if (normalized_name.empty()) {
    throw Error(Errc::empty_name, "cannot categorize an empty ingredient name");
  }
  std::string user = "Classify the ingredient \"" + normalized_name +
                     "\" into exactly one of the following 23 food "
                     "categories. Respond with the category name only.\n";
  const auto& names = category_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    user += std::to_string(i + 1) + ". " + names[i] + "\n";
  }
  return {
      {"system", "You are a food classification assistant."},
      {"user", user},
  };
}

ParsedCategory parse_category(std::string_view response) {
  std::string cleaned = trim(response);
  while (!cleaned.empty() &&
         (cleaned.back() == '.' || cleaned.back() == '!' ||
          cleaned.back() == '?' || cleaned.back() == ',')) {
    cleaned.pop_back();
    cleaned = trim(cleaned);
  }
  const std::string folded = lowercase(cleaned);

  const auto& names = category_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (folded == lowercase(names[i])) {
      ParseRoute route =
          (cleaned == trim(response) && cleaned == names[i]) ? ParseRoute::exact
                                                             : ParseRoute::repaired;
      return {static_cast<FoodCategory>(i), route, false};
    }
  }

  // Unique substring repair: exactly one category name occurring anywhere
  // in the response.
  const std::string haystack = lowercase(response);
  std::optional<FoodCategory> match;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (haystack.find(lowercase(names[i])) != std::string::npos) {
      if (match) {
        match.reset();
        break;
      }
      match = static_cast<FoodCategory>(i);
    }
  }
  if (match) {
    return {*match, ParseRoute::substring, false};
  }
  return {FoodCategory::unclassified, ParseRoute::fallback, true};
}

CategorizeSummary categorize_all(const std::filesystem::path& input_path,
                                 const std::filesystem::path& output_path,
                                 gateway::ChatBackend& backend,
                                 const gateway::GatewayConfig& config,
                                 gateway::Clock& clock, const std::string& column,
                                 const std::filesystem::path* cache_path,
                                 const gateway::GenerationParams& params) {
  auto rows = csv::read_file(input_path);
  if (rows.empty()) {
    throw Error(Errc::malformed_line,
                "input CSV has no header row: " + input_path.string());
  }
  const auto& header = rows[0];
  std::size_t name_column = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (lowercase(header[i]) == lowercase(column)) {
      name_column = i;
      break;
    }
  }
  if (name_column == header.size()) {
    throw Error(Errc::malformed_line,
                "input CSV has no \"" + column + "\" column");
  }

  std::map<std::string, std::string> cache;  // normalized name -> category name
  if (cache_path && std::filesystem::exists(*cache_path)) {
    json stored = json::parse(io::read_text(*cache_path), nullptr, false);
    if (stored.is_discarded() || !stored.is_object()) {
      throw Error(Errc::bad_config,
                  "category cache is not a JSON object: " + cache_path->string());
    }
    for (const auto& [key, value] : stored.items()) {
      const std::string name = value.get<std::string>();
      if (!category_from_exact(name)) {
        throw Error(Errc::bad_config, "cache holds unknown category: " + name);
      }
      cache[key] = name;
    }
  }

  CategorizeSummary summary;
  summary.rows = rows.size() - 1;

  // One query per distinct normalized name not already cached.
  std::vector<std::string> pending;
  std::map<std::string, std::size_t> pending_index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw Error(Errc::malformed_line,
                  "row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[r].size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    const std::string name = normalize::normalize_name(rows[r][name_column]);
    if (name.empty()) continue;  // resolved to Unclassified below
    if (cache.count(name)) {
      ++summary.cache_hits;
      continue;
    }
    if (!pending_index.count(name)) {
      pending_index[name] = pending.size();
      pending.push_back(name);
    }
  }

  if (!pending.empty()) {
    std::vector<gateway::ChatExchange> exchanges(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
      exchanges[i].correlation_id = static_cast<std::int64_t>(i);
      exchanges[i].prompt = build_category_prompt(pending[i]);
    }
    auto completed =
        gateway::complete_batch(std::move(exchanges), params, config, backend, clock);
    for (std::size_t i = 0; i < completed.size(); ++i) {
      if (completed[i].ok()) {
        ParsedCategory parsed = parse_category(*completed[i].response);
        if (parsed.flagged) ++summary.flagged;
        cache[pending[i]] = to_string(parsed.category);
      } else {
        ++summary.flagged;
        cache[pending[i]] = to_string(FoodCategory::unclassified);
      }
    }
    summary.distinct_queries = pending.size();
  }

  std::vector<csv::Row> out_rows;
  out_rows.reserve(rows.size());
  csv::Row out_header = header;
  out_header.push_back("category");
  out_rows.push_back(std::move(out_header));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    csv::Row row = rows[r];
    const std::string name = normalize::normalize_name(row[name_column]);
    auto it = cache.find(name);
    row.push_back(it != cache.end() ? it->second
                                    : to_string(FoodCategory::unclassified));
    out_rows.push_back(std::move(row));
  }
  csv::write_file(output_path, out_rows);

  if (cache_path) {
    json stored = json::object();
    for (const auto& [key, value] : cache) stored[key] = value;
    io::write_text(*cache_path, stored.dump(2) + "\n");
  }
  return summary;
}

}  // namespace phytosub::categorize
