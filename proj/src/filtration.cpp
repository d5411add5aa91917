#include "phytosub/filtration.hpp"

#include <cmath>
#include <random>

#include "phytosub/error.hpp"

namespace phytosub::filtration {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

SplitStatistic statistic(const std::vector<double>& values) {
  SplitStatistic stat;
  const double n = static_cast<double>(values.size());
  for (double v : values) stat.mean += v;
  stat.mean /= n;
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - stat.mean) * (v - stat.mean);
    stat.std_dev = std::sqrt(acc / (n - 1.0));
  }
  return stat;
}

}  // namespace

std::string to_string(ValidityLabel label) {
  switch (label) {
    case ValidityLabel::correct: return "Correct";
    case ValidityLabel::potential: return "Potential";
    case ValidityLabel::incorrect: return "Incorrect";
  }
  return "Incorrect";
}

ValidityLabel validity_from_string(const std::string& value) {
  if (value == "Correct") return ValidityLabel::correct;
  if (value == "Potential") return ValidityLabel::potential;
  if (value == "Incorrect") return ValidityLabel::incorrect;
  throw Error(Errc::unparseable, "not a validity label: " + value);
}

std::string render_recipe_block(const corpus::Recipe& recipe) {
  std::string block = "Recipe: " + recipe.title + "\n\nIngredients:\n";
  for (const auto& line : recipe.ingredients) {
    block += "- " + line.raw_line + "\n";
  }
  block += "\nInstructions:\n";
  for (std::size_t i = 0; i < recipe.instructions.size(); ++i) {
    block += std::to_string(i + 1) + ". " + recipe.instructions[i] + "\n";
  }
  return block;
}

gateway::MessageList build_validity_prompt(const corpus::SubstitutionRecord& record,
                                           const corpus::Recipe& recipe) {
  if (record.recipe_id != recipe.id) {
    throw Error(Errc::recipe_mismatch, "record for recipe " + record.recipe_id +
                                           " rendered against " + recipe.id);
  }
  std::string user = render_recipe_block(recipe);
  user += "\nIn this recipe, can \"" + record.source +
          "\" be substituted with \"" + record.target +
          "\"? Answer with exactly one word: Correct, Potential, or Incorrect.";
  return {
      {"system", "You are a culinary expert evaluating ingredient substitutions."},
      {"user", user},
  };
}

ValidityLabel parse_validity_label(std::string_view response) {
  const std::string haystack = lowercase(response);
  struct Candidate {
    const char* word;
    ValidityLabel label;
  };
  // "incorrect" first: it contains "correct" and must win at equal offsets.
  static constexpr Candidate candidates[] = {
      {"incorrect", ValidityLabel::incorrect},
      {"potential", ValidityLabel::potential},
      {"correct", ValidityLabel::correct},
  };
  std::size_t best_pos = std::string::npos;
  ValidityLabel best = ValidityLabel::incorrect;
  for (const auto& candidate : candidates) {
    std::size_t pos = haystack.find(candidate.word);
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = candidate.label;
    }
  }
  if (best_pos == std::string::npos) {
    throw Error(Errc::unparseable,
                "no validity label in response: \"" + std::string(response) + "\"");
  }
  return best;
}

nlohmann::json FiltrationRun::to_json() const {
  json labels_json = json::array();
  for (const auto& entry : labels) {
    labels_json.push_back({{"id", entry.record_index},
                           {"label", to_string(entry.label)},
                           {"flagged", entry.flagged}});
  }
  return json{{"run", run_index},
              {"template", kTemplateVersion},
              {"labels", labels_json},
              {"kept", kept}};
}

std::vector<FiltrationRun> run_filtration(
    std::span<const corpus::SubstitutionRecord> records,
    const corpus::RecipeIndex& recipes, const BackendFactory& backend_factory,
    const gateway::GatewayConfig& config, const FiltrationParams& params,
    gateway::Clock& clock) {
  if (params.runs < 1) {
    throw Error(Errc::bad_config, "filtration needs at least one run");
  }

  // Precondition: every record's recipe resolves. Prompts are identical
  // across runs, so build them once.
  std::vector<gateway::MessageList> prompts;
  prompts.reserve(records.size());
  for (const auto& record : records) {
    prompts.push_back(build_validity_prompt(record, recipes.at(record.recipe_id)));
  }

  std::vector<FiltrationRun> runs;
  for (int run_index = 1; run_index <= params.runs; ++run_index) {
    auto backend = backend_factory(run_index);

    std::vector<gateway::ChatExchange> exchanges(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      exchanges[i].correlation_id = static_cast<std::int64_t>(i);
      exchanges[i].prompt = prompts[i];
    }
    auto completed = gateway::complete_batch(std::move(exchanges),
                                             params.generation, config,
                                             *backend, clock);

    FiltrationRun run;
    run.run_index = run_index;
    run.labels.resize(records.size());
    std::vector<std::size_t> requery;
    for (std::size_t i = 0; i < completed.size(); ++i) {
      LabeledRecord& entry = run.labels[i];
      entry.record_index = i;
      if (!completed[i].ok()) {
        entry.label = ValidityLabel::incorrect;
        entry.flagged = true;
        continue;
      }
      try {
        entry.label = parse_validity_label(*completed[i].response);
      } catch (const Error&) {
        requery.push_back(i);
      }
    }

    if (!requery.empty()) {
      std::vector<gateway::ChatExchange> second(requery.size());
      for (std::size_t k = 0; k < requery.size(); ++k) {
        second[k].correlation_id = static_cast<std::int64_t>(requery[k]);
        second[k].prompt = prompts[requery[k]];
      }
      auto redone = gateway::complete_batch(std::move(second), params.generation,
                                            config, *backend, clock);
      for (std::size_t k = 0; k < requery.size(); ++k) {
        LabeledRecord& entry = run.labels[requery[k]];
        entry.label = ValidityLabel::incorrect;
        entry.flagged = true;
        if (k < redone.size() && redone[k].ok()) {
          try {
            entry.label = parse_validity_label(*redone[k].response);
            entry.flagged = false;
          } catch (const Error&) {
            // stays flagged Incorrect
          }
        }
      }
    }

    std::vector<corpus::SubstitutionRecord> kept_records;
    for (const auto& entry : run.labels) {
      if (entry.label == ValidityLabel::correct) {
        run.kept.push_back(entry.record_index);
        kept_records.push_back(records[entry.record_index]);
      } else if (entry.label == ValidityLabel::potential) {
        run.potential.push_back(entry.record_index);
      }
    }
    run.kept_counts = corpus::compute_split_stats(kept_records);
    runs.push_back(std::move(run));
  }
  return runs;
}

RunSummary summarize_runs(std::span<const FiltrationRun> runs) {
  if (runs.empty()) {
    throw Error(Errc::empty_input, "summarize_runs needs at least one run");
  }
  std::vector<double> train, validation, test, total;
  for (const auto& run : runs) {
    train.push_back(static_cast<double>(run.kept_counts.train));
    validation.push_back(static_cast<double>(run.kept_counts.validation));
    test.push_back(static_cast<double>(run.kept_counts.test));
    total.push_back(static_cast<double>(run.kept_counts.total));
  }
  RunSummary summary;
  summary.train = statistic(train);
  summary.validation = statistic(validation);
  summary.test = statistic(test);
  summary.total = statistic(total);
  summary.n_runs = static_cast<int>(runs.size());
  summary.single_run = runs.size() == 1;
  return summary;
}

std::size_t select_run(std::size_t n_runs, int explicit_run, std::uint64_t seed) {
  if (n_runs == 0) {
    throw Error(Errc::empty_input, "no runs to select from");
  }
  if (explicit_run > 0) {
    if (static_cast<std::size_t>(explicit_run) > n_runs) {
      throw Error(Errc::bad_config, "run index out of range: " +
                                        std::to_string(explicit_run));
    }
    return static_cast<std::size_t>(explicit_run - 1);
  }
  std::mt19937_64 rng(seed);
  return static_cast<std::size_t>(rng() % n_runs);
}

}  // namespace phytosub::filtration
