#include <doctest.h>

#include <nlohmann/json.hpp>

#include "phytosub/error.hpp"
#include "phytosub/finetune.hpp"
#include "phytosub/io.hpp"
#include "support.hpp"

using namespace phytosub;
using namespace phytosub::finetune;
using nlohmann::json;

namespace {

struct Corpus {
  std::vector<corpus::Recipe> recipes;
  corpus::RecipeIndex index;
  std::vector<corpus::SubstitutionRecord> records;

  Corpus()
      : recipes(corpus::load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                                     corpus::RecipeFormat::json_lines)),
        index(recipes),
        records(corpus::load_substitutions(testsupport::data_dir() /
                                           "subs_6.jsonl")) {}
};

}  // namespace

TEST_CASE("all six manifests match the reference table") {
  struct Row {
    ModelKind kind;
    DatasetVariant variant;
    int epochs, steps, batch;
    bool optimized;
  };
  const Row rows[] = {
      {ModelKind::davinci_002, DatasetVariant::unfiltered, 1, 1533, 32, false},
      {ModelKind::davinci_002, DatasetVariant::filtered, 1, 1554, 20, false},
      {ModelKind::gpt35_turbo_1106, DatasetVariant::unfiltered, 1, 1533, 32, false},
      {ModelKind::gpt35_turbo_1106, DatasetVariant::filtered, 1, 1554, 20, false},
      {ModelKind::tinyllama_1_1b, DatasetVariant::unfiltered, 1, 1532, 8, true},
      {ModelKind::tinyllama_1_1b, DatasetVariant::filtered, 1, 970, 8, true},
  };
  for (const auto& row : rows) {
    auto manifest = emit_manifest(row.kind, row.variant);
    CAPTURE(to_string(row.kind));
    CAPTURE(to_string(row.variant));
    CHECK(manifest.epochs == row.epochs);
    CHECK(manifest.steps == row.steps);
    CHECK(manifest.batch_size == row.batch);
    CHECK(manifest.manually_optimized == row.optimized);
    CHECK(manifest.extras.has_value() ==
          (row.kind == ModelKind::tinyllama_1_1b));
  }
}

TEST_CASE("tinyllama extras carry the trainer settings") {
  auto manifest = emit_manifest(ModelKind::tinyllama_1_1b, DatasetVariant::filtered);
  REQUIRE(manifest.extras.has_value());
  const auto& extras = *manifest.extras;
  CHECK(extras.learning_rate == 5e-4);
  CHECK(extras.gradient_accumulation == 4);
  CHECK(extras.optimizer == "paged_adamw_32bit");
  CHECK(extras.scheduler == "cosine");
  CHECK(extras.logging_interval == 25);
  CHECK(extras.eval_interval == 50);
  CHECK(extras.max_sequence_length == 512);
  CHECK_FALSE(extras.packing);
  CHECK(extras == TinyLlamaExtras{});
}

TEST_CASE("manifest files") {
  CHECK(manifest_filename(ModelKind::gpt35_turbo_1106, DatasetVariant::filtered) ==
        "gpt-3.5-turbo-1106_filtered.manifest.json");
  auto path = testsupport::temp_path("manifest.json");
  write_manifest(emit_manifest(ModelKind::davinci_002, DatasetVariant::unfiltered),
                 path);
  auto parsed = json::parse(testsupport::read_file(path));
  CHECK(parsed["steps"] == 1533);
  CHECK(parsed["batch_size"] == 32);
  CHECK(parsed["epochs"] == 1);
  CHECK_FALSE(parsed.contains("extras"));
}

TEST_CASE("model and variant parsing accepts cli shorthands") {
  CHECK(model_kind_from_string("gpt35") == ModelKind::gpt35_turbo_1106);
  CHECK(model_kind_from_string("davinci-002") == ModelKind::davinci_002);
  CHECK(model_kind_from_string("tinyllama") == ModelKind::tinyllama_1_1b);
  CHECK_THROWS_AS(model_kind_from_string("gpt4"), Error);
  CHECK_THROWS_AS(variant_from_string("raw"), Error);
}

TEST_CASE("estimate_token_length boundary arithmetic") {
  CHECK(estimate_token_length("") == 0);
  CHECK(estimate_token_length(std::string(2048, 'x')) == 512);
  CHECK(estimate_token_length(std::string(2049, 'x')) == 513);
  CHECK(estimate_token_length("abcd") == 1);
  CHECK(estimate_token_length("abcde") == 2);
}

TEST_CASE("prompt-completion export carries the sentinels") {
  Corpus fx;
  auto out_path = testsupport::temp_path("export_pc.jsonl");
  auto summary = export_prompt_completion(fx.records, fx.index, out_path);
  CHECK(summary.records == fx.records.size());
  CHECK(summary.over_limit.empty());

  auto lines = io::read_lines(out_path);
  REQUIRE(lines.size() == fx.records.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto entry = json::parse(lines[i]);
    const std::string prompt = entry.at("prompt");
    const std::string completion = entry.at("completion");
    CHECK_FALSE(prompt.empty());
    CHECK_FALSE(completion.empty());
    CHECK(prompt.ends_with(kPromptSeparator));
    CHECK(completion == " " + fx.records[i].target + kCompletionSuffix);
  }
  CHECK(json::parse(lines[0]).at("completion") == " margarine END");
}

TEST_CASE("chat export emits system/user/assistant messages") {
  Corpus fx;
  auto out_path = testsupport::temp_path("export_chat.jsonl");
  auto summary = export_chat(fx.records, fx.index, out_path);
  CHECK(summary.records == fx.records.size());

  auto lines = io::read_lines(out_path);
  REQUIRE(lines.size() == fx.records.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto messages = json::parse(lines[i]).at("messages");
    REQUIRE(messages.size() == 3);
    CHECK(messages[0].at("role") == "system");
    CHECK(messages[1].at("role") == "user");
    CHECK(messages[2].at("role") == "assistant");
    CHECK(messages[2].at("content") == fx.records[i].target);
    CHECK(messages[1].at("content").get<std::string>().find(
              fx.records[i].source) != std::string::npos);
  }
}

TEST_CASE("export edge cases") {
  Corpus fx;
  auto out_path = testsupport::temp_path("export_empty.jsonl");
  auto summary = export_prompt_completion({}, fx.index, out_path);
  CHECK(summary.records == 0);
  CHECK(io::read_lines(out_path).empty());

  std::vector<corpus::SubstitutionRecord> unresolvable{
      {"missing", "a", "b", corpus::Split::train}};
  CHECK_THROWS_AS(export_prompt_completion(unresolvable, fx.index, out_path),
                  Error);
}

TEST_CASE("over-length records are exported but reported") {
  corpus::Recipe huge;
  huge.id = "huge";
  huge.title = "Very Long";
  huge.ingredients.push_back({"1 cup filler", "filler"});
  huge.instructions.push_back(std::string(3000, 'x'));
  std::vector<corpus::Recipe> recipes{huge};
  corpus::RecipeIndex index(recipes);
  std::vector<corpus::SubstitutionRecord> records{
      {"huge", "filler", "substitute", corpus::Split::train}};

  auto out_path = testsupport::temp_path("export_long.jsonl");
  auto summary = export_prompt_completion(records, index, out_path);
  CHECK(summary.records == 1);
  REQUIRE(summary.over_limit.size() == 1);
  CHECK(summary.over_limit[0] == 0);
  // the record itself is intact, never truncated
  auto entry = json::parse(io::read_lines(out_path)[0]);
  CHECK(entry.at("prompt").get<std::string>().find(std::string(3000, 'x')) !=
        std::string::npos);
}
