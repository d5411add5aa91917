#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phytosub/corpus.hpp"
#include "phytosub/gateway.hpp"

namespace phytosub::filtration {

enum class ValidityLabel { correct, potential, incorrect };

std::string to_string(ValidityLabel label);  // "Correct" / "Potential" / "Incorrect"
ValidityLabel validity_from_string(const std::string& value);

inline constexpr const char* kTemplateVersion = "V1";

// Recipe block shared by the validity prompt and the fine-tune exports:
// title, bulleted ingredient lines, numbered instructions.
std::string render_recipe_block(const corpus::Recipe& recipe);

// Byte-stable template V1. Throws Error{recipe_mismatch} when the record
// does not belong to the recipe.
gateway::MessageList build_validity_prompt(const corpus::SubstitutionRecord& record,
                                           const corpus::Recipe& recipe);

// Case-insensitive scan; the label whose word occurs first wins. Throws
// Error{unparseable} when no label word occurs.
ValidityLabel parse_validity_label(std::string_view response);

struct LabeledRecord {
  std::size_t record_index = 0;  // position in the input dataset
  ValidityLabel label = ValidityLabel::incorrect;
  bool flagged = false;  // gateway failure or unparseable after re-query
};

struct FiltrationRun {
  int run_index = 1;
  std::vector<LabeledRecord> labels;       // input order, one per record
  std::vector<std::size_t> kept;           // indices labeled Correct
  std::vector<std::size_t> potential;      // indices labeled Potential
  corpus::SplitStats kept_counts;

  nlohmann::json to_json() const;
};

struct FiltrationParams {
  gateway::GenerationParams generation{"gpt-3.5-turbo", 0.5, 10};
  int runs = 5;
};

// Builds one backend per run; a mock factory typically varies the seed with
// the run index while an HTTP factory returns the same endpoint every time.
using BackendFactory =
    std::function<std::unique_ptr<gateway::ChatBackend>(int run_index)>;

// Labels every record in every run. Unparseable responses are re-queried
// once, then flagged Incorrect; gateway failures are flagged Incorrect after
// the gateway's own retries.
std::vector<FiltrationRun> run_filtration(
    std::span<const corpus::SubstitutionRecord> records,
    const corpus::RecipeIndex& recipes, const BackendFactory& backend_factory,
    const gateway::GatewayConfig& config, const FiltrationParams& params,
    gateway::Clock& clock);

struct SplitStatistic {
  double mean = 0.0;
  double std_dev = 0.0;  // sample (n-1) standard deviation
};

struct RunSummary {
  SplitStatistic train;
  SplitStatistic validation;
  SplitStatistic test;
  SplitStatistic total;
  int n_runs = 0;
  bool single_run = false;
};

// Mean and sample standard deviation of kept counts per split.
RunSummary summarize_runs(std::span<const FiltrationRun> runs);

// Picks the run used downstream: explicit index (1-based) or a uniform
// choice driven by a seed.
std::size_t select_run(std::size_t n_runs, int explicit_run, std::uint64_t seed);

}  // namespace phytosub::filtration
