#include "phytosub/corpus.hpp"

#include <set>

#include "phytosub/error.hpp"
#include "phytosub/io.hpp"

namespace phytosub::corpus {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(std::size_t line_number, const std::string& what) {
  throw Error(Errc::malformed_record, "line " + std::to_string(line_number) +
                                          ": " + what);
}

std::string require_string(const json& obj, const char* key,
                           std::size_t line_number) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    malformed(line_number, std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

json parse_json_line(const std::string& line, std::size_t line_number) {
  json value = json::parse(line, nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    malformed(line_number, "not a JSON object");
  }
  return value;
}

Recipe recipe_from_legacy(const json& entry, std::size_t index) {
  // Recipe1M layout: {"id", "title", "ingredients": [{"text": ...}],
  // "instructions": [{"text": ...}]}
  Recipe recipe;
  recipe.id = require_string(entry, "id", index);
  recipe.title = require_string(entry, "title", index);
  auto ing = entry.find("ingredients");
  if (ing == entry.end() || !ing->is_array() || ing->empty()) {
    malformed(index, "recipe has no ingredients");
  }
  for (const auto& item : *ing) {
    std::string text = require_string(item, "text", index);
    IngredientLine line{text, derive_ingredient_name(text)};
    if (line.name.empty()) {
      malformed(index, "ingredient line has no name: \"" + text + "\"");
    }
    recipe.ingredients.push_back(std::move(line));
  }
  if (auto instr = entry.find("instructions"); instr != entry.end()) {
    for (const auto& item : *instr) {
      recipe.instructions.push_back(require_string(item, "text", index));
    }
  }
  return recipe;
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& value, std::size_t line_number) {
  if (value == "train") return Split::train;
  if (value == "validation") return Split::validation;
  if (value == "test") return Split::test;
  throw Error(Errc::unknown_split,
              "line " + std::to_string(line_number) + ": unknown split \"" +
                  value + "\"");
}

std::string derive_ingredient_name(const std::string& raw_line) {
  const auto is_quantity_token = [](const std::string& token) {
    bool has_digit = false;
    for (std::size_t i = 0; i < token.size();) {
      unsigned char c = static_cast<unsigned char>(token[i]);
      if (c >= '0' && c <= '9') {
        has_digit = true;
        ++i;
      } else if (c < 0x80) {
        static const std::string allowed = "/-.,x";
        if (allowed.find(static_cast<char>(c)) == std::string::npos) {
          return false;
        }
        ++i;
      } else {
        // multibyte: treat fraction glyphs as digits, anything else as text
        std::string folded = normalize::normalize_name(token);
        return folded.empty();
      }
    }
    return has_digit;
  };

  std::vector<std::string> tokens;
  std::string token;
  for (char c : raw_line) {
    if (c == ' ' || c == '\t') {
      if (!token.empty()) tokens.push_back(std::move(token));
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));

  std::size_t first = 0;
  while (first < tokens.size() && is_quantity_token(tokens[first])) ++first;

  std::string name;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    if (!name.empty()) name.push_back(' ');
    name += tokens[i];
  }
  return name;
}

nlohmann::json recipe_to_json(const Recipe& recipe) {
  json ingredients = json::array();
  for (const auto& line : recipe.ingredients) {
    ingredients.push_back({{"raw_line", line.raw_line}, {"name", line.name}});
  }
  return json{{"id", recipe.id},
              {"title", recipe.title},
              {"ingredients", ingredients},
              {"instructions", recipe.instructions}};
}

Recipe recipe_from_json(const nlohmann::json& value, std::size_t line_number) {
  Recipe recipe;
  recipe.id = require_string(value, "id", line_number);
  if (recipe.id.empty()) malformed(line_number, "empty recipe id");
  recipe.title = require_string(value, "title", line_number);
  auto ing = value.find("ingredients");
  if (ing == value.end() || !ing->is_array() || ing->empty()) {
    malformed(line_number, "recipe has no ingredients");
  }
  for (const auto& item : *ing) {
    IngredientLine line;
    if (item.is_string()) {
      line.raw_line = item.get<std::string>();
      line.name = derive_ingredient_name(line.raw_line);
    } else if (item.is_object()) {
      line.raw_line = require_string(item, "raw_line", line_number);
      if (item.contains("name")) {
        line.name = require_string(item, "name", line_number);
      } else {
        line.name = derive_ingredient_name(line.raw_line);
      }
    } else {
      malformed(line_number, "ingredient entry must be string or object");
    }
    if (line.name.empty()) {
      malformed(line_number,
                "ingredient line has no name: \"" + line.raw_line + "\"");
    }
    recipe.ingredients.push_back(std::move(line));
  }
  if (auto instr = value.find("instructions"); instr != value.end()) {
    if (!instr->is_array()) malformed(line_number, "instructions must be an array");
    for (const auto& step : *instr) {
      if (!step.is_string()) malformed(line_number, "instruction must be a string");
      recipe.instructions.push_back(step.get<std::string>());
    }
  }
  return recipe;
}

std::vector<Recipe> load_recipes(const std::filesystem::path& path,
                                 RecipeFormat format) {
  std::vector<Recipe> recipes;
  if (format == RecipeFormat::json_lines) {
    auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      recipes.push_back(recipe_from_json(parse_json_line(lines[i], i + 1), i + 1));
    }
  } else {
    json root = json::parse(io::read_text(path), nullptr, false);
    if (root.is_discarded() || !root.is_array()) {
      malformed(1, "legacy corpus must be a JSON array");
    }
    std::size_t index = 0;
    for (const auto& entry : root) {
      ++index;
      if (!entry.is_object()) malformed(index, "entry is not an object");
      recipes.push_back(recipe_from_legacy(entry, index));
    }
  }
  std::set<std::string> seen;
  for (const auto& recipe : recipes) {
    if (!seen.insert(recipe.id).second) {
      throw Error(Errc::duplicate_id, "duplicate recipe id: " + recipe.id);
    }
  }
  return recipes;
}

void write_recipes(std::span<const Recipe> recipes,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& recipe : recipes) {
    out += recipe_to_json(recipe).dump();
    out.push_back('\n');
  }
  io::write_text(path, out);
}

std::vector<SubstitutionRecord> load_substitutions(
    const std::filesystem::path& path) {
  auto lines = io::read_lines(path);
  std::vector<SubstitutionRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_number = i + 1;
    json value = parse_json_line(lines[i], line_number);
    SubstitutionRecord record;
    record.recipe_id = require_string(value, "recipe_id", line_number);
    record.source = require_string(value, "source", line_number);
    record.target = require_string(value, "target", line_number);
    record.split =
        split_from_string(require_string(value, "split", line_number), line_number);
    if (record.source.empty() || record.target.empty()) {
      malformed(line_number, "empty source or target");
    }
    if (normalize::normalize_name(record.source) ==
        normalize::normalize_name(record.target)) {
      malformed(line_number, "source equals target after normalization: \"" +
                                 record.source + "\"");
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_dataset(std::span<const SubstitutionRecord> records,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& record : records) {
    json value{{"recipe_id", record.recipe_id},
               {"source", record.source},
               {"target", record.target},
               {"split", to_string(record.split)}};
    out += value.dump();
    out.push_back('\n');
  }
  io::write_text(path, out);
}

SplitStats compute_split_stats(std::span<const SubstitutionRecord> records) {
  SplitStats stats;
  for (const auto& record : records) {
    switch (record.split) {
      case Split::train: ++stats.train; break;
      case Split::validation: ++stats.validation; break;
      case Split::test: ++stats.test; break;
    }
  }
  stats.total = stats.train + stats.validation + stats.test;
  return stats;
}

RecipeIndex::RecipeIndex(std::span<const Recipe> recipes) {
  for (const auto& recipe : recipes) {
    if (!by_id_.emplace(recipe.id, recipe).second) {
      throw Error(Errc::duplicate_id, "duplicate recipe id: " + recipe.id);
    }
  }
}

const Recipe* RecipeIndex::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it != by_id_.end() ? &it->second : nullptr;
}

const Recipe& RecipeIndex::at(const std::string& id) const {
  const Recipe* recipe = find(id);
  if (!recipe) {
    throw Error(Errc::unresolvable_recipe, "no recipe with id: " + id);
  }
  return *recipe;
}

}  // namespace phytosub::corpus
