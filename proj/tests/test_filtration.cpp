#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "phytosub/error.hpp"
#include "phytosub/filtration.hpp"
#include "phytosub/io.hpp"
#include "support.hpp"

using namespace phytosub;
using namespace phytosub::filtration;
using nlohmann::json;

namespace {

struct Fixture {
  std::vector<corpus::Recipe> recipes;
  corpus::RecipeIndex index;
  std::vector<corpus::SubstitutionRecord> pairs;
  json script;

  Fixture()
      : recipes(corpus::load_recipes(
            testsupport::data_dir() / "filtration" / "recipes_15.jsonl",
            corpus::RecipeFormat::json_lines)),
        index(recipes),
        pairs(corpus::load_substitutions(testsupport::data_dir() / "filtration" /
                                         "pairs_15.jsonl")),
        script(json::parse(io::read_text(testsupport::data_dir() / "filtration" /
                                         "mock_script.json"))) {}
};

BackendFactory mock_factory(const json& script) {
  return [script](int run_index) {
    return std::make_unique<gateway::MockBackend>(
        script, static_cast<std::uint64_t>(run_index));
  };
}

}  // namespace

TEST_CASE("validity prompt is byte-stable and complete") {
  Fixture fx;
  const auto& record = fx.pairs[0];
  auto prompt = build_validity_prompt(record, fx.index.at(record.recipe_id));
  REQUIRE(prompt.size() == 2);
  CHECK(prompt[0].role == "system");
  CHECK(prompt[1].role == "user");
  const std::string& user = prompt[1].content;
  CHECK(user.find("orange juice") != std::string::npos);
  CHECK(user.find("pineapple juice") != std::string::npos);
  CHECK(user.find("Correct") != std::string::npos);
  CHECK(user.find("Potential") != std::string::npos);
  CHECK(user.find("Incorrect") != std::string::npos);
  CHECK(user.find("Sunrise Punch") != std::string::npos);

  auto again = build_validity_prompt(record, fx.index.at(record.recipe_id));
  CHECK(gateway::messages_to_json(prompt).dump() ==
        gateway::messages_to_json(again).dump());

  CHECK_THROWS_AS(build_validity_prompt(record, fx.index.at("f002")), Error);
}

TEST_CASE("parse_validity_label scans case-insensitively, first word wins") {
  CHECK(parse_validity_label("Correct") == ValidityLabel::correct);
  CHECK(parse_validity_label("potential - depends on the dressing") ==
        ValidityLabel::potential);
  CHECK(parse_validity_label("Incorrect") == ValidityLabel::incorrect);
  CHECK(parse_validity_label("This is incorrect, not correct.") ==
        ValidityLabel::incorrect);
  CHECK(parse_validity_label("correct; potentially even great") ==
        ValidityLabel::correct);
  CHECK_THROWS_AS(parse_validity_label("maybe"), Error);
  CHECK_THROWS_AS(parse_validity_label(""), Error);
}

TEST_CASE("the committed mock script matches freshly built prompts") {
  Fixture fx;
  const auto& responses = fx.script.at("responses");
  REQUIRE(responses.size() == fx.pairs.size());
  for (const auto& record : fx.pairs) {
    auto key = gateway::prompt_key(
        build_validity_prompt(record, fx.index.at(record.recipe_id)));
    CAPTURE(record.source);
    CHECK(responses.contains(key));
  }
}

TEST_CASE("run_filtration keeps the Correct pairs and buckets the rest") {
  Fixture fx;
  FiltrationParams params;
  params.runs = 5;
  gateway::GatewayConfig config;
  gateway::VirtualClock clock;

  auto runs = run_filtration(fx.pairs, fx.index, mock_factory(fx.script), config,
                             params, clock);
  REQUIRE(runs.size() == 5);
  const std::vector<std::size_t> correct{0, 1, 2, 3, 4};
  const std::vector<std::size_t> potential{5, 6, 7, 8, 9};
  for (const auto& run : runs) {
    CHECK(run.labels.size() == fx.pairs.size());  // label totality
    CHECK(run.kept == correct);
    CHECK(run.potential == potential);
    for (std::size_t i = 10; i < 15; ++i) {
      CHECK(run.labels[i].label == ValidityLabel::incorrect);
      CHECK_FALSE(run.labels[i].flagged);
    }
    CHECK(run.kept_counts == corpus::SplitStats{3, 1, 1, 5});
    for (std::size_t kept_index : run.kept) {
      CHECK(run.labels[kept_index].label == ValidityLabel::correct);
    }
  }

  auto run_json = runs[0].to_json();
  CHECK(run_json["run"] == 1);
  CHECK(run_json["template"] == "V1");
  CHECK(run_json["labels"].size() == 15);
  CHECK(run_json["kept"] == json(correct));
}

TEST_CASE("all-Correct script keeps everything in every run") {
  auto recipes = corpus::load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                                      corpus::RecipeFormat::json_lines);
  corpus::RecipeIndex index(recipes);
  auto records = corpus::load_substitutions(testsupport::data_dir() / "subs_6.jsonl");
  FiltrationParams params;
  gateway::GatewayConfig config;
  gateway::VirtualClock clock;
  auto runs = run_filtration(records, index, mock_factory(json{{"default", "Correct"}}),
                             config, params, clock);
  REQUIRE(runs.size() == 5);
  for (const auto& run : runs) {
    CHECK(run.kept.size() == 6);
    CHECK(run.kept_counts.total == 6);
  }
}

TEST_CASE("unparseable responses are re-queried once then flagged Incorrect") {
  auto recipes = corpus::load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                                      corpus::RecipeFormat::json_lines);
  corpus::RecipeIndex index(recipes);
  auto records = corpus::load_substitutions(testsupport::data_dir() / "subs_6.jsonl");
  FiltrationParams params;
  params.runs = 1;
  gateway::GatewayConfig config;
  gateway::VirtualClock clock;
  auto runs = run_filtration(records, index, mock_factory(json{{"default", "maybe"}}),
                             config, params, clock);
  REQUIRE(runs.size() == 1);
  for (const auto& entry : runs[0].labels) {
    CHECK(entry.label == ValidityLabel::incorrect);
    CHECK(entry.flagged);
  }
  CHECK(runs[0].kept.empty());
}

TEST_CASE("unresolvable recipes abort before any querying") {
  corpus::RecipeIndex empty_index;
  std::vector<corpus::SubstitutionRecord> records{
      {"missing", "a", "b", corpus::Split::train}};
  FiltrationParams params;
  gateway::GatewayConfig config;
  gateway::VirtualClock clock;
  CHECK_THROWS_AS(run_filtration(records, empty_index,
                                 mock_factory(json{{"default", "Correct"}}),
                                 config, params, clock),
                  Error);
}

TEST_CASE("summarize_runs reproduces the reference kept-count statistics") {
  // per-run kept counts of the five reference filtration runs
  const std::int64_t train[] = {31733, 31795, 31797, 31908, 31860};
  const std::int64_t validation[] = {7082, 7097, 7083, 7073, 7136};
  const std::int64_t test[] = {7080, 7056, 7096, 7113, 7081};
  std::vector<FiltrationRun> runs(5);
  for (int i = 0; i < 5; ++i) {
    runs[static_cast<std::size_t>(i)].run_index = i + 1;
    runs[static_cast<std::size_t>(i)].kept_counts = {
        train[i], validation[i], test[i], train[i] + validation[i] + test[i]};
  }
  auto summary = summarize_runs(runs);
  CHECK(summary.n_runs == 5);
  CHECK_FALSE(summary.single_run);
  CHECK(std::round(summary.train.mean) == 31819);
  CHECK(std::round(summary.train.std_dev) == 67);
  CHECK(std::round(summary.validation.mean) == 7094);
  CHECK(std::round(summary.validation.std_dev) == 25);
  CHECK(std::round(summary.test.mean) == 7085);
  CHECK(std::round(summary.test.std_dev) == 21);
  CHECK(std::round(summary.total.mean) == 45998);
  CHECK(std::round(summary.total.std_dev) == 85);
}

TEST_CASE("summarize_runs degenerate single run") {
  std::vector<FiltrationRun> runs(1);
  runs[0].kept_counts = {100, 0, 0, 100};
  auto summary = summarize_runs(runs);
  CHECK(summary.single_run);
  CHECK(summary.train.mean == 100.0);
  CHECK(summary.train.std_dev == 0.0);
  CHECK_THROWS_AS(summarize_runs({}), Error);
}

TEST_CASE("select_run") {
  CHECK(select_run(5, 3, 0) == 2);
  CHECK_THROWS_AS(select_run(5, 6, 0), Error);
  CHECK_THROWS_AS(select_run(0, 0, 1), Error);
  auto first = select_run(5, 0, 1234);
  CHECK(select_run(5, 0, 1234) == first);
  CHECK(first < 5);
}
