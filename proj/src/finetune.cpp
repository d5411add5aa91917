#include "phytosub/finetune.hpp"

#include "phytosub/error.hpp"
#include "phytosub/filtration.hpp"
#include "phytosub/io.hpp"

namespace phytosub::finetune {

namespace {

using nlohmann::json;

std::string build_request_text(const corpus::SubstitutionRecord& record,
                               const corpus::Recipe& recipe) {
  std::string text = filtration::render_recipe_block(recipe);
  text += "\nSuggest exactly one substitute for \"" + record.source + "\".";
  return text;
}

inline constexpr const char* kSystemMessage =
    "You are a culinary expert suggesting ingredient substitutions.";

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::davinci_002: return "davinci-002";
    case ModelKind::gpt35_turbo_1106: return "gpt-3.5-turbo-1106";
    case ModelKind::tinyllama_1_1b: return "tinyllama-1.1b";
  }
  return "davinci-002";
}

std::string to_string(DatasetVariant variant) {
  return variant == DatasetVariant::filtered ? "filtered" : "unfiltered";
}

ModelKind model_kind_from_string(const std::string& value) {
  if (value == "davinci-002" || value == "davinci") return ModelKind::davinci_002;
  if (value == "gpt-3.5-turbo-1106" || value == "gpt35") {
    return ModelKind::gpt35_turbo_1106;
  }
  if (value == "tinyllama-1.1b" || value == "tinyllama") {
    return ModelKind::tinyllama_1_1b;
  }
  throw Error(Errc::bad_config, "unknown model kind: " + value);
}

DatasetVariant variant_from_string(const std::string& value) {
  if (value == "unfiltered") return DatasetVariant::unfiltered;
  if (value == "filtered") return DatasetVariant::filtered;
  throw Error(Errc::bad_config, "unknown dataset variant: " + value);
}

nlohmann::json TrainingManifest::to_json() const {
  json out{{"model", to_string(model_kind)},
           {"dataset_variant", to_string(dataset_variant)},
           {"epochs", epochs},
           {"steps", steps},
           {"batch_size", batch_size},
           {"manually_optimized", manually_optimized}};
  if (extras) {
    out["extras"] = json{{"learning_rate", extras->learning_rate},
                         {"gradient_accumulation", extras->gradient_accumulation},
                         {"optimizer", extras->optimizer},
                         {"scheduler", extras->scheduler},
                         {"logging_interval", extras->logging_interval},
                         {"eval_interval", extras->eval_interval},
                         {"max_sequence_length", extras->max_sequence_length},
                         {"packing", extras->packing}};
  }
  return out;
}

TrainingManifest emit_manifest(ModelKind kind, DatasetVariant variant) {
  TrainingManifest manifest;
  manifest.model_kind = kind;
  manifest.dataset_variant = variant;
  manifest.epochs = 1;
  const bool filtered = variant == DatasetVariant::filtered;
  switch (kind) {
    case ModelKind::davinci_002:
    case ModelKind::gpt35_turbo_1106:
      manifest.steps = filtered ? 1554 : 1533;
      manifest.batch_size = filtered ? 20 : 32;
      break;
    case ModelKind::tinyllama_1_1b:
      manifest.steps = filtered ? 970 : 1532;
      manifest.batch_size = 8;
      manifest.extras = TinyLlamaExtras{};
      manifest.manually_optimized = true;
      break;
  }
  return manifest;
}

std::string manifest_filename(ModelKind kind, DatasetVariant variant) {
  return to_string(kind) + "_" + to_string(variant) + ".manifest.json";
}

void write_manifest(const TrainingManifest& manifest,
                    const std::filesystem::path& path) {
  io::write_text(path, manifest.to_json().dump(2) + "\n");
}

int estimate_token_length(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

ExportSummary export_prompt_completion(
    std::span<const corpus::SubstitutionRecord> records,
    const corpus::RecipeIndex& recipes, const std::filesystem::path& out_path) {
  ExportSummary summary;
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    const corpus::Recipe& recipe = recipes.at(record.recipe_id);
    std::string prompt = build_request_text(record, recipe) + kPromptSeparator;
    std::string completion = " " + record.target + kCompletionSuffix;
    if (estimate_token_length(prompt + completion) > kSequenceLimit) {
      summary.over_limit.push_back(i);
    }
    out += json{{"prompt", prompt}, {"completion", completion}}.dump();
    out.push_back('\n');
    ++summary.records;
  }
  io::write_text(out_path, out);
  return summary;
}

ExportSummary export_chat(std::span<const corpus::SubstitutionRecord> records,
                          const corpus::RecipeIndex& recipes,
                          const std::filesystem::path& out_path) {
  ExportSummary summary;
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    const corpus::Recipe& recipe = recipes.at(record.recipe_id);
    const std::string user = build_request_text(record, recipe);
    json messages = json::array({
        json{{"role", "system"}, {"content", kSystemMessage}},
        json{{"role", "user"}, {"content", user}},
        json{{"role", "assistant"}, {"content", record.target}},
    });
    std::string flattened = std::string(kSystemMessage) + user + record.target;
    if (estimate_token_length(flattened) > kSequenceLimit) {
      summary.over_limit.push_back(i);
    }
    out += json{{"messages", messages}}.dump();
    out.push_back('\n');
    ++summary.records;
  }
  io::write_text(out_path, out);
  return summary;
}

}  // namespace phytosub::finetune
