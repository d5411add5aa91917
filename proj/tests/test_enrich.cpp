#include <doctest.h>

#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "phytosub/enrich.hpp"
#include "phytosub/error.hpp"
#include "phytosub/io.hpp"
#include "support.hpp"

using namespace phytosub;
using namespace phytosub::enrich;
using nlohmann::json;

namespace {

struct Fixture {
  std::vector<corpus::Recipe> recipes;
  PhytoTable table;
  ScriptedSubstitutions backend;

  Fixture()
      : recipes(corpus::load_recipes(testsupport::data_dir() / "recipes_10.jsonl",
                                     corpus::RecipeFormat::json_lines)),
        table(PhytoTable::load(testsupport::data_dir() / "phyto_table.csv")),
        backend(ScriptedSubstitutions::from_file(testsupport::data_dir() /
                                                 "mock" / "enrich_map.json")) {}
};

// Independent enumeration of expected pairs: raw CSV arithmetic plus the raw
// substitution map, none of the PhytoTable/proposal machinery.
struct Oracle {
  std::map<std::string, std::map<std::string, double>> scores;  // name -> net -> score
  std::map<std::string, std::string> mapping;

  Oracle() {
    auto lines =
        io::read_lines(testsupport::data_dir() / "phyto_table.csv");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto first = lines[i].find(',');
      auto second = lines[i].find(',', first + 1);
      auto key = normalize::fold_plural(
          normalize::normalize_name(lines[i].substr(0, first)));
      scores[key][lines[i].substr(first + 1, second - first - 1)] =
          std::stod(lines[i].substr(second + 1));
    }
    auto raw = json::parse(
        io::read_text(testsupport::data_dir() / "mock" / "enrich_map.json"));
    for (const auto& [key, value] : raw.items()) {
      mapping[normalize::fold_plural(normalize::normalize_name(key))] =
          value.get<std::string>();
    }
  }

  double score(const std::string& name) const {
    auto folded = normalize::fold_plural(normalize::normalize_name(name));
    auto it = scores.find(folded);
    if (it == scores.end()) return 0.0;
    double total = 0.0;
    for (const auto& [network, value] : it->second) total += value;
    return total;
  }

  // expected (pairs, unique recipes) under all networks
  std::pair<std::size_t, std::size_t> enumerate(
      const std::vector<corpus::Recipe>& recipes, bool salad_only) const {
    std::size_t pairs = 0;
    std::set<std::string> unique;
    for (const auto& recipe : recipes) {
      if (salad_only) {
        auto title = normalize::normalize_name(recipe.title);
        if ((" " + title + " ").find(" salad ") == std::string::npos) continue;
      }
      std::set<std::string> seen;
      for (const auto& line : recipe.ingredients) {
        auto key = normalize::fold_plural(normalize::normalize_name(line.name));
        if (!seen.insert(key).second) continue;
        auto it = mapping.find(key);
        if (it == mapping.end()) continue;
        if (score(it->second) > score(line.name)) {
          ++pairs;
          unique.insert(recipe.id);
        }
      }
    }
    return {pairs, unique.size()};
  }
};

}  // namespace

TEST_CASE("network names") {
  CHECK(network_from_string("cancer") == Network::cancer);
  CHECK(network_from_string("Covid19") == Network::covid19);
  CHECK(network_from_string("COVID-19") == Network::covid19);
  CHECK_THROWS_AS(network_from_string("gout"), Error);
  CHECK(parse_networks("cancer, alzheimers") ==
        NetworkSet{Network::cancer, Network::alzheimers});
  CHECK(parse_networks("") == NetworkSet{});
}

TEST_CASE("phyto table loading") {
  Fixture fx;
  CHECK_FALSE(fx.table.empty());
  CHECK(fx.table.score("olive oil", all_networks()) == 4.0);
  CHECK(fx.table.score("olive oil", {Network::alzheimers}) == 3.0);
  CHECK(fx.table.score("radishes", all_networks()) == 0.0);
  CHECK(fx.table.score("blackcurrants", {Network::covid19}) == 2.0);  // folded
  CHECK(fx.table.networks_of("kale", all_networks()) ==
        NetworkSet{Network::alzheimers, Network::covid19});

  auto bad_network = testsupport::temp_path("phyto_bad_network.csv");
  testsupport::write_file(bad_network,
                          "ingredient,network,score\nginger,gout,1\n");
  CHECK_THROWS_AS(PhytoTable::load(bad_network), Error);

  auto negative = testsupport::temp_path("phyto_negative.csv");
  testsupport::write_file(negative,
                          "ingredient,network,score\nginger,Cancer,-1\n");
  CHECK_THROWS_AS(PhytoTable::load(negative), Error);

  auto conflicting = testsupport::temp_path("phyto_conflict.csv");
  testsupport::write_file(
      conflicting,
      "ingredient,network,score\nginger,Cancer,1\nginger,Cancer,2\n");
  CHECK_THROWS_AS(PhytoTable::load(conflicting), Error);

  // an exact duplicate row is deduplicated
  auto duplicate = testsupport::temp_path("phyto_dup.csv");
  testsupport::write_file(
      duplicate, "ingredient,network,score\nginger,Cancer,1\nginger,Cancer,1\n");
  CHECK(PhytoTable::load(duplicate).score("ginger", all_networks()) == 1.0);

  auto empty = testsupport::temp_path("phyto_empty.csv");
  testsupport::write_file(empty, "");
  auto empty_table = PhytoTable::load(empty);
  CHECK(empty_table.empty());
  CHECK(empty_table.score("anything", all_networks()) == 0.0);
}

TEST_CASE("recipe_phyto_score sums per-ingredient scores") {
  Fixture fx;
  corpus::Recipe none;
  none.id = "none";
  none.title = "Plain";
  none.ingredients = {{"1 cup water", "water"}};
  CHECK(recipe_phyto_score(none, fx.table, all_networks()) == 0.0);

  corpus::Recipe cabbage_only;
  cabbage_only.id = "c";
  cabbage_only.title = "Cabbage";
  cabbage_only.ingredients = {{"1 head cabbage", "cabbage"}};
  CHECK(recipe_phyto_score(cabbage_only, fx.table, {Network::cancer}) == 1.0);
  CHECK(recipe_phyto_score(cabbage_only, fx.table, {Network::covid19}) == 0.0);

  // additivity against per-ingredient enumeration, across the whole fixture
  for (const auto& recipe : fx.recipes) {
    double per_ingredient = 0.0;
    for (const auto& line : recipe.ingredients) {
      per_ingredient += fx.table.score(line.name, all_networks());
    }
    CHECK(recipe_phyto_score(recipe, fx.table, all_networks()) ==
          doctest::Approx(per_ingredient));
  }
}

TEST_CASE("propose_substitutions applies the strict-improvement rule") {
  Fixture fx;
  const auto& thai = fx.recipes[1];  // Thai-Style Beef Salad
  auto proposals =
      propose_substitutions(thai, fx.backend, fx.table, all_networks());
  REQUIRE(proposals.accepted.size() == 2);
  CHECK(proposals.accepted[0].original == "mung bean sprouts");
  CHECK(proposals.accepted[0].substitute == "cabbage");
  CHECK(proposals.accepted[0].networks == NetworkSet{Network::cancer});
  CHECK(proposals.accepted[0].score_delta > 0);
  CHECK(proposals.accepted[1].original == "sesame oil");
  CHECK(proposals.accepted[1].substitute == "olive oil");

  // under the Alzheimers lens only the oil swap still helps
  auto alzheimers =
      propose_substitutions(thai, fx.backend, fx.table, {Network::alzheimers});
  REQUIRE(alzheimers.accepted.size() == 1);
  CHECK(alzheimers.accepted[0].substitute == "olive oil");
  CHECK(alzheimers.accepted[0].score_delta == 3.0);

  // kale -> spinach loses score and is rejected with a reason
  const auto& kale_salad = fx.recipes[2];
  auto rejected =
      propose_substitutions(kale_salad, fx.backend, fx.table, all_networks());
  bool saw_no_gain = false;
  for (const auto& rejection : rejected.rejected) {
    if (rejection.original == "kale") {
      CHECK(rejection.reason == RejectReason::no_gain);
      CHECK(rejection.candidate == "spinach");
      saw_no_gain = true;
    }
  }
  CHECK(saw_no_gain);
}

TEST_CASE("filter_salads keeps exactly the titled salads") {
  Fixture fx;
  auto salads = filter_salads(fx.recipes);
  std::set<std::string> ids;
  for (const auto& recipe : salads) ids.insert(recipe.id);
  CHECK(ids == std::set<std::string>{"r001", "r002", "r003", "r004", "r005",
                                     "r009"});
  // idempotent
  auto twice = filter_salads(salads);
  CHECK(twice.size() == salads.size());
}

TEST_CASE("rank_recipes orders by score with id tie-breaks") {
  Fixture fx;
  auto ranked = rank_recipes(fx.recipes, fx.table, all_networks());
  REQUIRE(ranked.size() == 10);
  std::vector<std::string> order;
  for (const auto& entry : ranked) order.push_back(entry.recipe_id);
  CHECK(order == std::vector<std::string>{"r008", "r003", "r009", "r001", "r005",
                                          "r006", "r010", "r002", "r004",
                                          "r007"});
  CHECK(ranked[0].score == 4.0);

  // all-zero scores fall back to id order
  auto empty = testsupport::temp_path("phyto_none.csv");
  testsupport::write_file(empty, "ingredient,network,score\n");
  auto zero_ranked = rank_recipes(fx.recipes, PhytoTable::load(empty), all_networks());
  for (std::size_t i = 0; i < zero_ranked.size(); ++i) {
    CHECK(zero_ranked[i].recipe_id == fx.recipes[i].id);
  }
}

TEST_CASE("enrich_corpus matches the brute-force enumeration") {
  Fixture fx;
  Oracle oracle;

  auto salad_expected = oracle.enumerate(fx.recipes, true);
  CHECK(salad_expected == std::pair<std::size_t, std::size_t>{11, 5});

  auto outcome = enrich_corpus(fx.recipes, fx.backend, fx.table, all_networks(),
                               /*salad_only=*/true);
  CHECK(outcome.report.n_pairs == salad_expected.first);
  CHECK(outcome.report.n_unique_recipes == salad_expected.second);
  CHECK(outcome.report.failures.empty());
  for (const auto& entry : outcome.report.accepted_pairs) {
    CHECK(entry.pair.score_delta > 0);
  }

  auto full_expected = oracle.enumerate(fx.recipes, false);
  CHECK(full_expected == std::pair<std::size_t, std::size_t>{13, 7});
  ScriptedSubstitutions backend_again = fx.backend;
  auto full = enrich_corpus(fx.recipes, backend_again, fx.table, all_networks(),
                            /*salad_only=*/false);
  CHECK(full.report.n_pairs == full_expected.first);
  CHECK(full.report.n_unique_recipes == full_expected.second);
}

TEST_CASE("enrichment strictly raises recipe scores and is idempotent") {
  Fixture fx;
  auto outcome = enrich_corpus(fx.recipes, fx.backend, fx.table, all_networks(),
                               /*salad_only=*/true);
  corpus::RecipeIndex original_index(fx.recipes);
  for (const auto& enriched : outcome.recipes) {
    const double before = recipe_phyto_score(original_index.at(enriched.recipe.id),
                                             fx.table, all_networks());
    const double after =
        recipe_phyto_score(enriched.recipe, fx.table, all_networks());
    CHECK(after >= before);
    double delta_sum = 0.0;
    for (const auto& pair : enriched.substitutions) delta_sum += pair.score_delta;
    if (!enriched.substitutions.empty()) {
      CHECK(after > before);
    }
    CHECK(after == doctest::Approx(before + delta_sum));
  }

  // a second pass over the enriched recipes accepts nothing new
  std::vector<corpus::Recipe> enriched_recipes;
  for (const auto& entry : outcome.recipes) enriched_recipes.push_back(entry.recipe);
  ScriptedSubstitutions backend_again = fx.backend;
  auto second = enrich_corpus(enriched_recipes, backend_again, fx.table,
                              all_networks(), /*salad_only=*/true);
  CHECK(second.report.n_pairs == 0);
}

TEST_CASE("enrichment rewrites ingredient lines but keeps quantities") {
  Fixture fx;
  auto outcome = enrich_corpus(fx.recipes, fx.backend, fx.table, all_networks(),
                               /*salad_only=*/true);
  const auto& watercress_salad = outcome.recipes[0].recipe;
  CHECK(watercress_salad.id == "r001");
  CHECK(watercress_salad.ingredients[3].name == "olive oil");
  CHECK(watercress_salad.ingredients[3].raw_line == "1 tbsp olive oil");
  CHECK(watercress_salad.ingredients[0].name == "watercress");  // unchanged
}

namespace {

struct ThrowingBackend : SubstitutionBackend {
  std::optional<std::string> propose(const std::string& normalized_source,
                                     const corpus::Recipe&) override {
    if (normalized_source == "kale") throw std::runtime_error("boom");
    return std::nullopt;
  }
};

}  // namespace

TEST_CASE("backend failures are recorded and never abort the recipe") {
  Fixture fx;
  ThrowingBackend backend;
  auto proposals = propose_substitutions(fx.recipes[2], backend, fx.table,
                                         all_networks());
  bool saw_failure = false;
  for (const auto& rejection : proposals.rejected) {
    if (rejection.original == "kale") {
      CHECK(rejection.reason == RejectReason::backend_failure);
      saw_failure = true;
    }
  }
  CHECK(saw_failure);
  CHECK(proposals.rejected.size() == fx.recipes[2].ingredients.size());

  auto outcome = enrich_corpus(fx.recipes, backend, fx.table, all_networks(),
                               /*salad_only=*/true);
  CHECK(outcome.report.n_pairs == 0);
  REQUIRE(outcome.report.failures.size() == 1);
  CHECK(outcome.report.failures[0].find("r003") == 0);
}

TEST_CASE("empty table accepts nothing") {
  Fixture fx;
  auto empty_path = testsupport::temp_path("phyto_empty2.csv");
  testsupport::write_file(empty_path, "");
  auto empty_table = PhytoTable::load(empty_path);
  ScriptedSubstitutions backend_again = fx.backend;
  auto outcome = enrich_corpus(fx.recipes, backend_again, empty_table,
                               all_networks(), false);
  CHECK(outcome.report.n_pairs == 0);
  for (std::size_t i = 0; i < outcome.recipes.size(); ++i) {
    CHECK(outcome.recipes[i].recipe == fx.recipes[i]);
  }
}

TEST_CASE("enriched recipes serialize with a substitutions array") {
  Fixture fx;
  auto outcome = enrich_corpus(fx.recipes, fx.backend, fx.table, all_networks(),
                               /*salad_only=*/true);
  auto path = testsupport::temp_path("enriched.jsonl");
  write_enriched(outcome, path);
  auto lines = io::read_lines(path);
  REQUIRE(lines.size() == outcome.recipes.size());
  auto first = json::parse(lines[0]);
  CHECK(first.contains("substitutions"));
  CHECK(first.at("substitutions").size() == 3);  // the Watercress Salad swaps
  CHECK(first.at("substitutions")[0].contains("score_delta"));
  CHECK(first.at("substitutions")[0].contains("networks"));
}
