#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include "phytosub/gateway.hpp"

namespace phytosub::categorize {

// The 23 FooDB food categories, in their canonical order. Serialized names
// are fixed; every category emitted anywhere must be one of these strings.
enum class FoodCategory {
  herbs_and_spices,
  fats_and_oils,
  unclassified,
  baby_foods,
  snack_foods,
  dishes,
  baking_goods,
  confectioneries,
  eggs,
  milk_and_milk_products,
  animal_foods,
  aquatic_foods,
  beverages,
  cocoa_and_cocoa_products,
  soy,
  coffee_and_coffee_products,
  gourds,
  teas,
  pulses,
  cereals_and_cereal_products,
  nuts,
  fruits,
  vegetables,
};

inline constexpr std::size_t kCategoryCount = 23;

const std::array<const char*, kCategoryCount>& category_names();
const char* to_string(FoodCategory category);
std::optional<FoodCategory> category_from_exact(std::string_view name);

inline constexpr const char* kTemplateVersion = "C1";

// Byte-stable template C1: lists all 23 category names and demands the
// category name only. Throws Error{empty_name} for an empty ingredient.
gateway::MessageList build_category_prompt(const std::string& normalized_name);

enum class ParseRoute { exact, repaired, substring, fallback };

struct ParsedCategory {
  FoodCategory category = FoodCategory::unclassified;
  ParseRoute route = ParseRoute::fallback;
  // true when the response did not resolve to a category (fallback route)
  bool flagged = false;
};

// Exact match after trimming, case folding, and terminal punctuation
// stripping; then unique substring match; otherwise Unclassified, flagged.
ParsedCategory parse_category(std::string_view response);

struct CategorizeSummary {
  std::size_t rows = 0;
  std::size_t distinct_queries = 0;
  std::size_t flagged = 0;
  std::size_t cache_hits = 0;
};

// Appends a "category" column to the CSV at input_path. One gateway query
// per distinct normalized name; results optionally persisted to a JSON
// cache file reused across invocations. Temperature stays at 0.
CategorizeSummary categorize_all(
    const std::filesystem::path& input_path,
    const std::filesystem::path& output_path, gateway::ChatBackend& backend,
    const gateway::GatewayConfig& config, gateway::Clock& clock,
    const std::string& column = "ingredient",
    const std::filesystem::path* cache_path = nullptr,
    const gateway::GenerationParams& params = {"gpt-4", 0.0, 10});

}  // namespace phytosub::categorize
