#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phytosub/corpus.hpp"

namespace phytosub::finetune {

enum class ModelKind { davinci_002, gpt35_turbo_1106, tinyllama_1_1b };
enum class DatasetVariant { unfiltered, filtered };

std::string to_string(ModelKind kind);         // "davinci-002", ...
std::string to_string(DatasetVariant variant); // "unfiltered" / "filtered"
ModelKind model_kind_from_string(const std::string& value);
DatasetVariant variant_from_string(const std::string& value);

// Trainer-side knobs that only the TinyLlama runs carry.
struct TinyLlamaExtras {
  double learning_rate = 5e-4;
  int gradient_accumulation = 4;
  std::string optimizer = "paged_adamw_32bit";
  std::string scheduler = "cosine";
  int logging_interval = 25;
  int eval_interval = 50;
  int max_sequence_length = 512;
  bool packing = false;

  bool operator==(const TinyLlamaExtras&) const = default;
};

struct TrainingManifest {
  ModelKind model_kind = ModelKind::davinci_002;
  DatasetVariant dataset_variant = DatasetVariant::unfiltered;
  int epochs = 1;
  int steps = 0;
  int batch_size = 0;
  std::optional<TinyLlamaExtras> extras;  // present iff TinyLlama
  bool manually_optimized = false;

  nlohmann::json to_json() const;
};

TrainingManifest emit_manifest(ModelKind kind, DatasetVariant variant);

// "{model}_{variant}.manifest.json"
std::string manifest_filename(ModelKind kind, DatasetVariant variant);

void write_manifest(const TrainingManifest& manifest,
                    const std::filesystem::path& path);

inline constexpr const char* kPromptSeparator = "\n\n###\n\n";
inline constexpr const char* kCompletionSuffix = " END";
inline constexpr int kSequenceLimit = 512;

// ceil(character count / 4); a character-based stand-in for a tokenizer.
int estimate_token_length(std::string_view text);

struct ExportSummary {
  std::size_t records = 0;
  std::vector<std::size_t> over_limit;  // record indices estimated > 512 tokens
};

// One {"prompt", "completion"} object per record; the prompt ends with the
// separator sentinel and the completion is " {target} END". Over-length
// records are exported untouched and reported in the summary.
ExportSummary export_prompt_completion(
    std::span<const corpus::SubstitutionRecord> records,
    const corpus::RecipeIndex& recipes, const std::filesystem::path& out_path);

// One {"messages": [system, user, assistant]} object per record; the
// assistant content is the ground-truth target.
ExportSummary export_chat(std::span<const corpus::SubstitutionRecord> records,
                          const corpus::RecipeIndex& recipes,
                          const std::filesystem::path& out_path);

}  // namespace phytosub::finetune
