#include "phytosub/enrich.hpp"

#include <algorithm>
#include <cstdlib>

#include "phytosub/csv.hpp"
#include "phytosub/error.hpp"
#include "phytosub/io.hpp"

namespace phytosub::enrich {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string fold_name(std::string_view raw, const normalize::RuleTable& rules) {
  return normalize::fold_plural(normalize::normalize_name(raw, rules), rules);
}

json networks_to_json(const NetworkSet& networks) {
  json out = json::array();
  for (Network network : networks) out.push_back(to_string(network));
  return out;
}

// Case-insensitive find of needle in haystack; npos when absent.
std::size_t ifind(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return std::string::npos;
  const std::string h = lowercase(haystack);
  const std::string n = lowercase(needle);
  return h.find(n);
}

}  // namespace

std::string to_string(Network network) {
  switch (network) {
    case Network::cancer: return "Cancer";
    case Network::alzheimers: return "Alzheimers";
    case Network::covid19: return "Covid19";
  }
  return "Cancer";
}

Network network_from_string(const std::string& value) {
  const std::string folded = lowercase(value);
  if (folded == "cancer") return Network::cancer;
  if (folded == "alzheimers") return Network::alzheimers;
  if (folded == "covid19" || folded == "covid-19") return Network::covid19;
  throw Error(Errc::unknown_network, "unknown disease network: \"" + value + "\"");
}

NetworkSet all_networks() {
  return {Network::cancer, Network::alzheimers, Network::covid19};
}

NetworkSet parse_networks(const std::string& comma_separated) {
  NetworkSet networks;
  std::size_t start = 0;
  while (start <= comma_separated.size()) {
    std::size_t end = comma_separated.find(',', start);
    if (end == std::string::npos) end = comma_separated.size();
    std::string token = comma_separated.substr(start, end - start);
    // trim spaces
    while (!token.empty() && token.front() == ' ') token.erase(token.begin());
    while (!token.empty() && token.back() == ' ') token.pop_back();
    if (!token.empty()) networks.insert(network_from_string(token));
    if (end == comma_separated.size()) break;
    start = end + 1;
  }
  return networks;
}

PhytoTable PhytoTable::load(const std::filesystem::path& csv_path,
                            const normalize::RuleTable& rules) {
  auto rows = csv::read_file(csv_path);
  PhytoTable table;
  table.rules_ = rules;
  if (rows.empty()) {
    return table;  // empty table, every score 0
  }
  if (rows[0].size() < 3 || lowercase(rows[0][0]) != "ingredient" ||
      lowercase(rows[0][1]) != "network" || lowercase(rows[0][2]) != "score") {
    throw Error(Errc::malformed_line,
                "phytochemical table must start with header "
                "ingredient,network,score: " + csv_path.string());
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw Error(Errc::malformed_line,
                  "phytochemical row " + std::to_string(i + 1) +
                      " must have exactly three fields");
    }
    const std::string ingredient = fold_name(rows[i][0], rules);
    if (ingredient.empty()) {
      throw Error(Errc::malformed_line,
                  "phytochemical row " + std::to_string(i + 1) +
                      ": ingredient normalizes to empty");
    }
    const Network network = network_from_string(rows[i][1]);
    char* end = nullptr;
    const double score = std::strtod(rows[i][2].c_str(), &end);
    if (end == rows[i][2].c_str() || *end != '\0') {
      throw Error(Errc::malformed_line,
                  "phytochemical row " + std::to_string(i + 1) +
                      ": score is not a number: \"" + rows[i][2] + "\"");
    }
    if (score < 0) {
      throw Error(Errc::negative_score,
                  "phytochemical row " + std::to_string(i + 1) +
                      ": negative score for " + ingredient);
    }
    auto key = std::make_pair(ingredient, network);
    auto [it, inserted] = table.entries_.emplace(key, score);
    if (!inserted && it->second != score) {
      throw Error(Errc::duplicate_entry,
                  "conflicting scores for (" + ingredient + ", " +
                      to_string(network) + ")");
    }
  }
  return table;
}

double PhytoTable::score(std::string_view ingredient_name,
                         const NetworkSet& networks) const {
  const std::string key = fold_name(ingredient_name, rules_);
  double total = 0.0;
  for (Network network : networks) {
    auto it = entries_.find({key, network});
    if (it != entries_.end()) total += it->second;
  }
  return total;
}

NetworkSet PhytoTable::networks_of(std::string_view ingredient_name,
                                   const NetworkSet& networks) const {
  const std::string key = fold_name(ingredient_name, rules_);
  NetworkSet out;
  for (Network network : networks) {
    auto it = entries_.find({key, network});
    if (it != entries_.end() && it->second > 0) out.insert(network);
  }
  return out;
}

ScriptedSubstitutions::ScriptedSubstitutions(const nlohmann::json& mapping,
                                             const normalize::RuleTable& rules) {
  if (!mapping.is_object()) {
    throw Error(Errc::bad_config, "substitution script must be a JSON object");
  }
  for (const auto& [source, candidate] : mapping.items()) {
    if (!candidate.is_string()) {
      throw Error(Errc::bad_config,
                  "substitution script values must be strings");
    }
    mapping_[fold_name(source, rules)] = candidate.get<std::string>();
  }
}

ScriptedSubstitutions ScriptedSubstitutions::from_file(
    const std::filesystem::path& path) {
  json mapping = json::parse(io::read_text(path), nullptr, false);
  if (mapping.is_discarded()) {
    throw Error(Errc::bad_config,
                "substitution script is not valid JSON: " + path.string());
  }
  return ScriptedSubstitutions(mapping);
}

std::optional<std::string> ScriptedSubstitutions::propose(
    const std::string& normalized_source, const corpus::Recipe& recipe) {
  (void)recipe;
  auto it = mapping_.find(
      normalize::fold_plural(normalized_source, normalize::RuleTable::defaults()));
  if (it == mapping_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> BaselineSubstitutions::propose(
    const std::string& normalized_source, const corpus::Recipe& recipe) {
  (void)recipe;
  return baseline_.predict(normalized_source);
}

GatewaySubstitutions::GatewaySubstitutions(gateway::ChatBackend& backend,
                                           gateway::GatewayConfig config,
                                           gateway::GenerationParams params,
                                           gateway::Clock& clock)
    : backend_(backend), config_(std::move(config)), params_(std::move(params)),
      clock_(clock) {}

std::optional<std::string> GatewaySubstitutions::propose(
    const std::string& normalized_source, const corpus::Recipe& recipe) {
  gateway::ChatExchange exchange;
  exchange.correlation_id = next_id_++;
  std::string user = "Recipe: " + recipe.title + "\n" +
                     "Suggest exactly one substitute for \"" + normalized_source +
                     "\". Answer with the ingredient name only.";
  exchange.prompt = {
      {"system", "You are a culinary expert suggesting ingredient substitutions."},
      {"user", user},
  };
  std::vector<gateway::ChatExchange> batch;
  batch.push_back(std::move(exchange));
  try {
    auto completed = gateway::complete_batch(std::move(batch), params_, config_,
                                             backend_, clock_);
    if (!completed[0].ok()) return std::nullopt;
    std::string candidate = eval::normalize_prediction(*completed[0].response);
    if (candidate.empty()) return std::nullopt;
    return candidate;
  } catch (const Error&) {
    return std::nullopt;
  }
}

double recipe_phyto_score(const corpus::Recipe& recipe, const PhytoTable& table,
                          const NetworkSet& networks,
                          const normalize::RuleTable& rules) {
  (void)rules;
  double total = 0.0;
  for (const auto& line : recipe.ingredients) {
    total += table.score(line.name, networks);
  }
  return total;
}

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::no_gain: return "NoGain";
    case RejectReason::no_candidate: return "NoCandidate";
    case RejectReason::backend_failure: return "BackendFailure";
  }
  return "NoCandidate";
}

RecipeProposals propose_substitutions(const corpus::Recipe& recipe,
                                      SubstitutionBackend& backend,
                                      const PhytoTable& table,
                                      const NetworkSet& networks,
                                      const normalize::RuleTable& rules) {
  RecipeProposals proposals;
  std::vector<std::string> queried;  // distinct folded keys, first occurrence
  for (const auto& line : recipe.ingredients) {
    const std::string name = normalize::normalize_name(line.name, rules);
    if (name.empty()) continue;
    const std::string key = normalize::fold_plural(name, rules);
    if (std::find(queried.begin(), queried.end(), key) != queried.end()) continue;
    queried.push_back(key);

    std::optional<std::string> candidate;
    bool backend_failed = false;
    try {
      candidate = backend.propose(name, recipe);
    } catch (const std::exception&) {
      backend_failed = true;
    }
    if (backend_failed) {
      proposals.rejected.push_back({name, std::nullopt,
                                    RejectReason::backend_failure});
      continue;
    }
    if (!candidate) {
      proposals.rejected.push_back({name, std::nullopt, RejectReason::no_candidate});
      continue;
    }
    const std::string substitute = normalize::normalize_name(*candidate, rules);
    const double before = table.score(name, networks);
    const double after = table.score(substitute, networks);
    if (after > before) {
      proposals.accepted.push_back({name, substitute,
                                    table.networks_of(substitute, networks),
                                    after - before});
    } else {
      proposals.rejected.push_back({name, substitute, RejectReason::no_gain});
    }
  }
  return proposals;
}

std::vector<corpus::Recipe> filter_salads(std::span<const corpus::Recipe> recipes,
                                          const normalize::RuleTable& rules) {
  std::vector<corpus::Recipe> salads;
  for (const auto& recipe : recipes) {
    const std::string title = normalize::fold_plural(
        normalize::normalize_name(recipe.title, rules), rules);
    std::size_t start = 0;
    bool found = false;
    while (start <= title.size()) {
      std::size_t end = title.find(' ', start);
      if (end == std::string::npos) end = title.size();
      if (title.compare(start, end - start, "salad") == 0) {
        found = true;
        break;
      }
      if (end == title.size()) break;
      start = end + 1;
    }
    if (found) salads.push_back(recipe);
  }
  return salads;
}

std::vector<RankedRecipe> rank_recipes(std::span<const corpus::Recipe> recipes,
                                       const PhytoTable& table,
                                       const NetworkSet& networks,
                                       const normalize::RuleTable& rules) {
  std::vector<RankedRecipe> ranked;
  ranked.reserve(recipes.size());
  for (const auto& recipe : recipes) {
    ranked.push_back({recipe.id, recipe.title,
                      recipe_phyto_score(recipe, table, networks, rules)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedRecipe& a, const RankedRecipe& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.recipe_id < b.recipe_id;
                   });
  return ranked;
}

nlohmann::json EnrichmentReport::to_json() const {
  json pairs = json::array();
  for (const auto& entry : accepted_pairs) {
    pairs.push_back({{"recipe_id", entry.recipe_id},
                     {"original", entry.pair.original},
                     {"substitute", entry.pair.substitute},
                     {"networks", networks_to_json(entry.pair.networks)},
                     {"score_delta", entry.pair.score_delta}});
  }
  return json{{"accepted_pairs", pairs},
              {"n_pairs", n_pairs},
              {"n_unique_recipes", n_unique_recipes},
              {"failures", failures}};
}

nlohmann::json EnrichedRecipe::to_json() const {
  json out = corpus::recipe_to_json(recipe);
  json subs = json::array();
  for (const auto& pair : substitutions) {
    subs.push_back({{"original", pair.original},
                    {"substitute", pair.substitute},
                    {"networks", networks_to_json(pair.networks)},
                    {"score_delta", pair.score_delta}});
  }
  out["substitutions"] = subs;
  return out;
}

EnrichOutcome enrich_corpus(std::span<const corpus::Recipe> recipes,
                            SubstitutionBackend& backend, const PhytoTable& table,
                            const NetworkSet& networks, bool salad_only,
                            const normalize::RuleTable& rules) {
  std::vector<corpus::Recipe> pool;
  if (salad_only) {
    pool = filter_salads(recipes, rules);
  } else {
    pool.assign(recipes.begin(), recipes.end());
  }

  EnrichOutcome outcome;
  std::set<std::string> recipes_with_pairs;
  for (const auto& recipe : pool) {
    RecipeProposals proposals =
        propose_substitutions(recipe, backend, table, networks, rules);
    for (const auto& rejection : proposals.rejected) {
      if (rejection.reason == RejectReason::backend_failure) {
        outcome.report.failures.push_back(recipe.id + ": backend failed for \"" +
                                          rejection.original + "\"");
      }
    }

    EnrichedRecipe enriched{recipe, proposals.accepted};
    for (const auto& pair : proposals.accepted) {
      outcome.report.accepted_pairs.push_back({recipe.id, pair});
      recipes_with_pairs.insert(recipe.id);
      // Rewrite every ingredient line bearing the original name; keep the
      // quantity text when the name is visible inside the raw line.
      for (auto& line : enriched.recipe.ingredients) {
        if (fold_name(line.name, rules) != fold_name(pair.original, rules)) continue;
        std::size_t pos = ifind(line.raw_line, line.name);
        if (pos != std::string::npos) {
          line.raw_line = line.raw_line.substr(0, pos) + pair.substitute +
                          line.raw_line.substr(pos + line.name.size());
        } else {
          line.raw_line = pair.substitute;
        }
        line.name = pair.substitute;
      }
    }
    outcome.recipes.push_back(std::move(enriched));
  }
  outcome.report.n_pairs = outcome.report.accepted_pairs.size();
  outcome.report.n_unique_recipes = recipes_with_pairs.size();
  return outcome;
}

void write_enriched(const EnrichOutcome& outcome,
                    const std::filesystem::path& path) {
  std::string out;
  for (const auto& enriched : outcome.recipes) {
    out += enriched.to_json().dump();
    out.push_back('\n');
  }
  io::write_text(path, out);
}

}  // namespace phytosub::enrich
