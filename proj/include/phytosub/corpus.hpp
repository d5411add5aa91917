#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phytosub/normalize.hpp"

namespace phytosub::corpus {

struct IngredientLine {
  std::string raw_line;
  std::string name;  // substring of raw_line with the leading quantity dropped

  bool operator==(const IngredientLine&) const = default;
};

struct Recipe {
  std::string id;
  std::string title;
  std::vector<IngredientLine> ingredients;
  std::vector<std::string> instructions;

  bool operator==(const Recipe&) const = default;
};

enum class Split { train, validation, test };

std::string to_string(Split split);
Split split_from_string(const std::string& value, std::size_t line_number = 0);

struct SubstitutionRecord {
  std::string recipe_id;
  std::string source;
  std::string target;
  Split split = Split::train;

  bool operator==(const SubstitutionRecord&) const = default;
};

struct SplitStats {
  std::int64_t train = 0;
  std::int64_t validation = 0;
  std::int64_t test = 0;
  std::int64_t total = 0;

  bool operator==(const SplitStats&) const = default;
};

enum class RecipeFormat { json_lines, legacy_recipe1m_json };

// Drops leading quantity tokens (tokens that are nothing but digits,
// fraction glyphs, and punctuation) from a raw ingredient line.
std::string derive_ingredient_name(const std::string& raw_line);

nlohmann::json recipe_to_json(const Recipe& recipe);
Recipe recipe_from_json(const nlohmann::json& value, std::size_t line_number);

std::vector<Recipe> load_recipes(const std::filesystem::path& path,
                                 RecipeFormat format);
void write_recipes(std::span<const Recipe> recipes,
                   const std::filesystem::path& path);

std::vector<SubstitutionRecord> load_substitutions(
    const std::filesystem::path& path);
void write_dataset(std::span<const SubstitutionRecord> records,
                   const std::filesystem::path& path);

SplitStats compute_split_stats(std::span<const SubstitutionRecord> records);

// Lookup table from recipe id to recipe; construction rejects duplicates.
class RecipeIndex {
 public:
  RecipeIndex() = default;
  explicit RecipeIndex(std::span<const Recipe> recipes);

  const Recipe* find(const std::string& id) const;
  // Throws Error{unresolvable_recipe} for unknown ids.
  const Recipe& at(const std::string& id) const;
  std::size_t size() const { return by_id_.size(); }

 private:
  std::map<std::string, Recipe> by_id_;
};

}  // namespace phytosub::corpus
