#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace phytosub::normalize {

struct Rule {
  std::string id;
  std::string description;
};

// Ordered rewrite rules plus the plural-folding exception list. The six
// built-in rules are selected by id; a config file may reorder or drop them
// and replace the exception list, but the defaults are what every shipped
// dataset and test assumes.
struct RuleTable {
  std::vector<Rule> rules;
  std::vector<std::string> plural_exceptions;  // lowercase

  static const RuleTable& defaults();
  // Accepts {"rules": ["R1", ...], "plural_exceptions": ["..."]}; either key
  // may be omitted. Unknown rule ids or keys are rejected.
  static RuleTable from_json(const nlohmann::json& config);
};

// Canonicalizes an ingredient name: lowercase, digit- and fraction-free,
// diacritics folded, punctuation stripped, whitespace collapsed. Idempotent;
// may return "" for all-numeric input.
std::string normalize_name(std::string_view raw,
                           const RuleTable& rules = RuleTable::defaults());

// Token-wise light plural folding over an already-normalized name.
std::string fold_plural(std::string_view normalized,
                        const RuleTable& rules = RuleTable::defaults());

// Curated synonym groups, loaded from a CSV with header group_id,member.
// Members are stored normalized; a member found in two groups is an error.
class CuratedGroups {
 public:
  CuratedGroups() = default;

  static CuratedGroups load(const std::filesystem::path& csv_path,
                            const RuleTable& rules = RuleTable::defaults());
  static CuratedGroups from_rows(
      const std::vector<std::pair<std::string, std::string>>& group_member_rows,
      const RuleTable& rules = RuleTable::defaults());

  // group id -> normalized members, sorted.
  const std::map<std::string, std::vector<std::string>>& groups() const {
    return groups_;
  }
  bool empty() const { return groups_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> groups_;
};

// Equivalence classes over normalized ingredient names. Names that agree
// after plural folding share a cluster, as do members of the same curated
// group; everything else is a singleton. Cluster ids are the
// lexicographically smallest member, so identical inputs rebuild the exact
// same clustering.
class IngredientClustering {
 public:
  IngredientClustering() : rules_(RuleTable::defaults()) {}

  std::string cluster_of(std::string_view name) const;
  bool same_cluster(std::string_view a, std::string_view b) const;

  // fold-key -> cluster id, every entry backed by at least one member name.
  const std::map<std::string, std::string>& assignments() const {
    return id_by_key_;
  }
  nlohmann::json to_json() const;

 private:
  friend IngredientClustering cluster_ingredients(
      const std::vector<std::string>&, const CuratedGroups&, const RuleTable&);

  RuleTable rules_;
  std::map<std::string, std::string> id_by_key_;
  std::map<std::string, std::vector<std::string>> members_by_id_;
};

IngredientClustering cluster_ingredients(
    const std::vector<std::string>& normalized_names,
    const CuratedGroups& curated = CuratedGroups(),
    const RuleTable& rules = RuleTable::defaults());

bool same_cluster(std::string_view a, std::string_view b,
                  const IngredientClustering& clustering);

}  // namespace phytosub::normalize
