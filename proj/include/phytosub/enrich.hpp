#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phytosub/corpus.hpp"
#include "phytosub/eval.hpp"
#include "phytosub/gateway.hpp"
#include "phytosub/normalize.hpp"

namespace phytosub::enrich {

enum class Network { cancer, alzheimers, covid19 };

std::string to_string(Network network);  // "Cancer" / "Alzheimers" / "Covid19"
Network network_from_string(const std::string& value);  // case-insensitive

using NetworkSet = std::set<Network>;

NetworkSet all_networks();
NetworkSet parse_networks(const std::string& comma_separated);

// Per-ingredient phytochemical scores keyed by (folded name, disease
// network), loaded from a CSV with header ingredient,network,score.
class PhytoTable {
 public:
  PhytoTable() = default;

  static PhytoTable load(const std::filesystem::path& csv_path,
                         const normalize::RuleTable& rules =
                             normalize::RuleTable::defaults());

  // Sum of this ingredient's scores over the given networks. Lookups fold
  // plurals, so "radishes" scores as "radish".
  double score(std::string_view ingredient_name, const NetworkSet& networks) const;
  // Networks (within the given set) where the ingredient scores > 0.
  NetworkSet networks_of(std::string_view ingredient_name,
                         const NetworkSet& networks) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  normalize::RuleTable rules_ = normalize::RuleTable::defaults();
  std::map<std::pair<std::string, Network>, double> entries_;
};

// One candidate substitute per queried ingredient; the scripted, baseline,
// and gateway implementations below cover offline and live use.
class SubstitutionBackend {
 public:
  virtual ~SubstitutionBackend() = default;
  // normalized_source is the normalized (not plural-folded) ingredient name;
  // nullopt means the backend has no candidate.
  virtual std::optional<std::string> propose(const std::string& normalized_source,
                                             const corpus::Recipe& recipe) = 0;
};

// JSON object {source -> candidate}; keys are folded at load.
class ScriptedSubstitutions : public SubstitutionBackend {
 public:
  explicit ScriptedSubstitutions(const nlohmann::json& mapping,
                                 const normalize::RuleTable& rules =
                                     normalize::RuleTable::defaults());
  static ScriptedSubstitutions from_file(const std::filesystem::path& path);

  std::optional<std::string> propose(const std::string& normalized_source,
                                     const corpus::Recipe& recipe) override;

 private:
  std::map<std::string, std::string> mapping_;
};

class BaselineSubstitutions : public SubstitutionBackend {
 public:
  explicit BaselineSubstitutions(eval::FrequencyBaseline baseline)
      : baseline_(std::move(baseline)) {}

  std::optional<std::string> propose(const std::string& normalized_source,
                                     const corpus::Recipe& recipe) override;

 private:
  eval::FrequencyBaseline baseline_;
};

// Asks a chat backend for one substitute and clips the reply like a
// prediction.
class GatewaySubstitutions : public SubstitutionBackend {
 public:
  GatewaySubstitutions(gateway::ChatBackend& backend,
                       gateway::GatewayConfig config,
                       gateway::GenerationParams params, gateway::Clock& clock);

  std::optional<std::string> propose(const std::string& normalized_source,
                                     const corpus::Recipe& recipe) override;

 private:
  gateway::ChatBackend& backend_;
  gateway::GatewayConfig config_;
  gateway::GenerationParams params_;
  gateway::Clock& clock_;
  std::int64_t next_id_ = 0;
};

double recipe_phyto_score(const corpus::Recipe& recipe, const PhytoTable& table,
                          const NetworkSet& networks,
                          const normalize::RuleTable& rules =
                              normalize::RuleTable::defaults());

enum class RejectReason { no_gain, no_candidate, backend_failure };
std::string to_string(RejectReason reason);

struct ProposedPair {
  std::string original;    // normalized ingredient name
  std::string substitute;  // normalized candidate
  NetworkSet networks;     // target networks the substitute scores on
  double score_delta = 0.0;
};

struct RejectedPair {
  std::string original;
  std::optional<std::string> candidate;
  RejectReason reason = RejectReason::no_candidate;
};

struct RecipeProposals {
  std::vector<ProposedPair> accepted;
  std::vector<RejectedPair> rejected;
};

// Queries the backend once per distinct ingredient name (first-occurrence
// order) and accepts a candidate only when it strictly raises the
// targeted-network score.
RecipeProposals propose_substitutions(const corpus::Recipe& recipe,
                                      SubstitutionBackend& backend,
                                      const PhytoTable& table,
                                      const NetworkSet& networks,
                                      const normalize::RuleTable& rules =
                                          normalize::RuleTable::defaults());

// Recipes whose normalized title contains the token "salad".
std::vector<corpus::Recipe> filter_salads(std::span<const corpus::Recipe> recipes,
                                          const normalize::RuleTable& rules =
                                              normalize::RuleTable::defaults());

struct RankedRecipe {
  std::string recipe_id;
  std::string title;
  double score = 0.0;
};

// Descending score, ties by recipe id ascending.
std::vector<RankedRecipe> rank_recipes(std::span<const corpus::Recipe> recipes,
                                       const PhytoTable& table,
                                       const NetworkSet& networks,
                                       const normalize::RuleTable& rules =
                                           normalize::RuleTable::defaults());

struct AcceptedPair {
  std::string recipe_id;
  ProposedPair pair;
};

struct EnrichmentReport {
  std::vector<AcceptedPair> accepted_pairs;
  std::size_t n_pairs = 0;
  std::size_t n_unique_recipes = 0;
  std::vector<std::string> failures;  // per-recipe failure notes

  nlohmann::json to_json() const;
};

struct EnrichedRecipe {
  corpus::Recipe recipe;                 // ingredient lines rewritten
  std::vector<ProposedPair> substitutions;  // provenance

  nlohmann::json to_json() const;  // recipe JSON plus a "substitutions" array
};

struct EnrichOutcome {
  EnrichmentReport report;
  std::vector<EnrichedRecipe> recipes;
};

EnrichOutcome enrich_corpus(std::span<const corpus::Recipe> recipes,
                            SubstitutionBackend& backend, const PhytoTable& table,
                            const NetworkSet& networks, bool salad_only,
                            const normalize::RuleTable& rules =
                                normalize::RuleTable::defaults());

void write_enriched(const EnrichOutcome& outcome,
                    const std::filesystem::path& path);

}  // namespace phytosub::enrich
