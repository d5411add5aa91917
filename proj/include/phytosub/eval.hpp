#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phytosub/corpus.hpp"
#include "phytosub/normalize.hpp"

namespace phytosub::eval {

struct PredictionRecord {
  // raw fields as read
  std::string original;
  std::string truth;
  std::string predicted;
  // normalized forms; the prediction is clipped at its first clause boundary
  // (comma or period) before normalization, since short completions often
  // trail extra words. May be empty for all-numeric or abstained predictions,
  // which can never score as hits.
  std::string norm_original;
  std::string norm_truth;
  std::string norm_predicted;
};

enum class PredictionFormat { json_lines, tsv };

// Clips at the first ',' or '.' and normalizes.
std::string normalize_prediction(std::string_view predicted,
                                 const normalize::RuleTable& rules =
                                     normalize::RuleTable::defaults());

PredictionRecord make_prediction_record(
    std::string original, std::string truth, std::string predicted,
    const normalize::RuleTable& rules = normalize::RuleTable::defaults());

// JSONL {"original","truth","predicted"} or three-column TSV. original and
// truth must normalize non-empty; predicted may be empty (an abstention).
std::vector<PredictionRecord> parse_predictions(
    const std::filesystem::path& path, PredictionFormat format,
    const normalize::RuleTable& rules = normalize::RuleTable::defaults());

struct EvaluationReport {
  std::size_t n_records = 0;
  std::size_t n_hits = 0;
  double hit_at_1 = 0.0;            // percentage
  std::vector<double> per_run;      // one percentage per scored run
  double mean = 0.0;
  double std_dev = 0.0;             // sample (n-1)
  bool single_run = true;

  nlohmann::json to_json() const;
};

// A record hits when the normalized prediction equals the normalized truth
// or shares its ingredient cluster. Throws Error{empty_input} on no records.
EvaluationReport hit_at_1(std::span<const PredictionRecord> records,
                          const normalize::IngredientClustering& clustering);

// Scores each run with hit_at_1 and aggregates mean/std across them.
EvaluationReport evaluate_runs(
    const std::vector<std::vector<PredictionRecord>>& runs,
    const normalize::IngredientClustering& clustering);

struct Aggregate {
  double mean = 0.0;
  double std_dev = 0.0;  // sample (n-1)
  bool single_run = false;
};

Aggregate aggregate_runs(std::span<const double> values);

// Half-up decimal rounding used everywhere a statistic is displayed.
double round_half_up(double value, int decimals);

// Modal-target predictor trained on substitution records; the offline
// stand-in for a fine-tuned model. Ties break to the lexicographically
// smallest target.
class FrequencyBaseline {
 public:
  struct Entry {
    std::string target;  // normalized
    int support = 0;
  };

  static FrequencyBaseline train(
      std::span<const corpus::SubstitutionRecord> records,
      const normalize::RuleTable& rules = normalize::RuleTable::defaults());

  // nullopt means Abstain; scored as a miss.
  std::optional<std::string> predict(std::string_view normalized_source) const;

  const std::map<std::string, Entry>& table() const { return table_; }

 private:
  std::map<std::string, Entry> table_;  // normalized source -> modal target
};

}  // namespace phytosub::eval
