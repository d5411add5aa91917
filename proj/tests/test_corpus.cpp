#include <doctest.h>

#include <random>

#include "phytosub/corpus.hpp"
#include "phytosub/error.hpp"
#include "support.hpp"

using namespace phytosub;
using namespace phytosub::corpus;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io_failure;
}

}  // namespace

TEST_CASE("load_recipes reads the shipped fixture") {
  auto recipes = load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                              RecipeFormat::json_lines);
  REQUIRE(recipes.size() == 10);
  for (std::size_t i = 0; i < recipes.size(); ++i) {
    char expected[8];
    std::snprintf(expected, sizeof(expected), "r%03zu", i + 1);
    CHECK(recipes[i].id == expected);
    CHECK_FALSE(recipes[i].ingredients.empty());
  }
  CHECK(recipes[0].title == "Watercress Salad");
  CHECK(recipes[0].ingredients[0].name == "watercress");
}

TEST_CASE("load_recipes edge cases") {
  auto empty = testsupport::temp_path("recipes_empty.jsonl");
  testsupport::write_file(empty, "");
  CHECK(load_recipes(empty, RecipeFormat::json_lines).empty());

  auto no_ingredients = testsupport::temp_path("recipes_noing.jsonl");
  testsupport::write_file(
      no_ingredients,
      R"({"id":"x1","title":"Empty","ingredients":[],"instructions":[]})" "\n");
  CHECK(code_of([&] { load_recipes(no_ingredients, RecipeFormat::json_lines); }) ==
        Errc::malformed_record);

  auto duplicate = testsupport::temp_path("recipes_dup.jsonl");
  testsupport::write_file(
      duplicate,
      R"({"id":"x1","title":"A","ingredients":["1 egg"],"instructions":[]})" "\n"
      R"({"id":"x1","title":"B","ingredients":["1 egg"],"instructions":[]})" "\n");
  CHECK(code_of([&] { load_recipes(duplicate, RecipeFormat::json_lines); }) ==
        Errc::duplicate_id);

  auto garbage = testsupport::temp_path("recipes_garbage.jsonl");
  testsupport::write_file(garbage, "not json\n");
  CHECK(code_of([&] { load_recipes(garbage, RecipeFormat::json_lines); }) ==
        Errc::malformed_record);
}

TEST_CASE("legacy corpus adapter") {
  auto path = testsupport::temp_path("recipes_legacy.json");
  testsupport::write_file(path, R"([
    {"id": "L1", "title": "Toast",
     "ingredients": [{"text": "2 slices bread"}, {"text": "1 tbsp butter"}],
     "instructions": [{"text": "Toast the bread."}, {"text": "Spread butter."}]}
  ])");
  auto recipes = load_recipes(path, RecipeFormat::legacy_recipe1m_json);
  REQUIRE(recipes.size() == 1);
  CHECK(recipes[0].id == "L1");
  CHECK(recipes[0].ingredients[0].raw_line == "2 slices bread");
  CHECK(recipes[0].ingredients[0].name == "slices bread");
  CHECK(recipes[0].instructions.size() == 2);
}

TEST_CASE("derive_ingredient_name strips leading quantities") {
  CHECK(derive_ingredient_name("2 Fresh Basil Leaves") == "Fresh Basil Leaves");
  CHECK(derive_ingredient_name("1 1/2 cups flour") == "cups flour");
  CHECK(derive_ingredient_name("½ cup sugar") == "cup sugar");
  CHECK(derive_ingredient_name("olive oil") == "olive oil");
  CHECK(derive_ingredient_name("a handful of mint") == "a handful of mint");
}

TEST_CASE("load_substitutions reads the shipped fixture") {
  auto records = load_substitutions(testsupport::data_dir() / "subs_6.jsonl");
  REQUIRE(records.size() == 6);
  auto stats = compute_split_stats(records);
  CHECK(stats.train == 4);
  CHECK(stats.validation == 1);
  CHECK(stats.test == 1);
  CHECK(stats.total == 6);
}

TEST_CASE("load_substitutions edge cases") {
  auto missing_target = testsupport::temp_path("subs_missing.jsonl");
  testsupport::write_file(
      missing_target,
      R"({"recipe_id":"r1","source":"butter","split":"train"})" "\n");
  CHECK(code_of([&] { load_substitutions(missing_target); }) ==
        Errc::malformed_record);

  auto bad_split = testsupport::temp_path("subs_badsplit.jsonl");
  testsupport::write_file(
      bad_split,
      R"({"recipe_id":"r1","source":"a","target":"b","split":"holdout"})" "\n");
  CHECK(code_of([&] { load_substitutions(bad_split); }) == Errc::unknown_split);

  auto self_sub = testsupport::temp_path("subs_self.jsonl");
  testsupport::write_file(
      self_sub,
      R"({"recipe_id":"r1","source":"Butter","target":"butter, 2","split":"train"})" "\n");
  CHECK(code_of([&] { load_substitutions(self_sub); }) == Errc::malformed_record);
}

TEST_CASE("compute_split_stats") {
  CHECK(compute_split_stats({}) == SplitStats{0, 0, 0, 0});

  std::mt19937 rng(3);
  std::vector<SubstitutionRecord> records;
  for (int i = 0; i < 200; ++i) {
    Split split = static_cast<Split>(rng() % 3);
    records.push_back({"r" + std::to_string(i), "a", "b", split});
  }
  auto stats = compute_split_stats(records);
  CHECK(stats.total == static_cast<std::int64_t>(records.size()));
  // each record lands in exactly one split
  std::int64_t recount = 0;
  for (Split split : {Split::train, Split::validation, Split::test}) {
    for (const auto& record : records) recount += record.split == split ? 1 : 0;
  }
  CHECK(recount == stats.total);
}

TEST_CASE("write_dataset round trip") {
  auto records = load_substitutions(testsupport::data_dir() / "subs_6.jsonl");
  auto path = testsupport::temp_path("subs_roundtrip.jsonl");
  write_dataset(records, path);
  CHECK(load_substitutions(path) == records);

  auto empty_path = testsupport::temp_path("subs_empty.jsonl");
  write_dataset({}, empty_path);
  CHECK(load_substitutions(empty_path).empty());

  CHECK(code_of([&] { write_dataset(records, "/nonexistent-dir/x.jsonl"); }) ==
        Errc::io_failure);
}

TEST_CASE("recipe JSONL round trip") {
  auto recipes = load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                              RecipeFormat::json_lines);
  auto path = testsupport::temp_path("recipes_roundtrip.jsonl");
  write_recipes(recipes, path);
  CHECK(load_recipes(path, RecipeFormat::json_lines) == recipes);
}

TEST_CASE("RecipeIndex lookup") {
  auto recipes = load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                              RecipeFormat::json_lines);
  RecipeIndex index(recipes);
  CHECK(index.at("r004").title == "Super Corn Salad");
  CHECK(index.find("nope") == nullptr);
  CHECK(code_of([&] { index.at("nope"); }) == Errc::unresolvable_recipe);
}
