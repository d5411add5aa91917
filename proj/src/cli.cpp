#include "phytosub/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phytosub/categorize.hpp"
#include "phytosub/config.hpp"
#include "phytosub/corpus.hpp"
#include "phytosub/enrich.hpp"
#include "phytosub/error.hpp"
#include "phytosub/eval.hpp"
#include "phytosub/filtration.hpp"
#include "phytosub/finetune.hpp"
#include "phytosub/gateway.hpp"
#include "phytosub/io.hpp"
#include "phytosub/normalize.hpp"

namespace phytosub::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string two_decimals(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f",
                eval::round_half_up(value, 2));
  return buffer;
}

struct CommonState {
  std::string config_path;
  GlobalConfig config;
  std::string report_path;

  // flag overrides; empty/negative means "not set"
  std::string endpoint;
  std::string model_id;
  int batch_size = -1;
  int max_retries = -1;
  double rps_cap = -1;

  void finalize() {
    if (!config_path.empty()) {
      config = GlobalConfig::load(config_path);
    }
    if (!endpoint.empty()) config.gateway.endpoint = endpoint;
    if (!model_id.empty()) config.model_id = model_id;
    if (batch_size >= 0) config.gateway.batch_size = batch_size;
    if (max_retries >= 0) config.gateway.max_retries = max_retries;
    if (rps_cap >= 0) config.gateway.rps_cap = rps_cap;
  }
};

void add_common_options(CLI::App* cmd, CommonState& state) {
  cmd->add_option("--config", state.config_path, "JSON config file");
  cmd->add_option("--report", state.report_path, "report JSON output path");
  cmd->add_option("--endpoint", state.endpoint, "chat-completions endpoint URL");
  cmd->add_option("--model-id", state.model_id, "model id sent to the endpoint");
  cmd->add_option("--batch-size", state.batch_size, "gateway batch size");
  cmd->add_option("--max-retries", state.max_retries, "gateway retry count");
  cmd->add_option("--rps-cap", state.rps_cap, "request-per-second cap");
}

void write_report(const CommonState& state, const std::string& command,
                  json body, const std::string& default_path, std::ostream& err) {
  body["command"] = command;
  body["config_hash"] = state.config.hash();
  const std::string path =
      state.report_path.empty() ? default_path : state.report_path;
  io::write_text(path, body.dump(2) + "\n");
  err << "config hash: " << state.config.hash() << "\n";
  err << "report: " << path << "\n";
}

// "mock:script.json[:seed]" or "http"
struct ChatBackendSpec {
  bool mock = false;
  std::string script_path;
  std::uint64_t seed = 0;
};

ChatBackendSpec parse_chat_backend(const std::string& spec) {
  ChatBackendSpec parsed;
  if (spec == "http") {
    return parsed;
  }
  if (spec.rfind("mock:", 0) == 0) {
    parsed.mock = true;
    std::string rest = spec.substr(5);
    std::size_t colon = rest.rfind(':');
    if (colon != std::string::npos &&
        rest.find_first_not_of("0123456789", colon + 1) == std::string::npos &&
        colon + 1 < rest.size()) {
      parsed.seed = std::strtoull(rest.c_str() + colon + 1, nullptr, 10);
      rest = rest.substr(0, colon);
    }
    parsed.script_path = rest;
    return parsed;
  }
  throw Error(Errc::bad_config,
              "backend must be \"http\" or \"mock:<script.json>\": " + spec);
}

std::unique_ptr<gateway::ChatBackend> make_chat_backend(
    const ChatBackendSpec& spec, const GlobalConfig& config,
    std::uint64_t seed_override) {
  if (spec.mock) {
    return std::make_unique<gateway::MockBackend>(
        gateway::MockBackend::from_file(spec.script_path,
                                        seed_override ? seed_override : spec.seed));
  }
  return std::make_unique<gateway::HttpBackend>(config.gateway);
}

std::vector<corpus::Recipe> load_recipes_arg(const std::string& path,
                                             const std::string& format) {
  corpus::RecipeFormat fmt = corpus::RecipeFormat::json_lines;
  if (format == "legacy") fmt = corpus::RecipeFormat::legacy_recipe1m_json;
  else if (format != "jsonl") {
    throw Error(Errc::bad_config, "recipes format must be jsonl or legacy");
  }
  return corpus::load_recipes(path, fmt);
}

normalize::IngredientClustering load_clustering(
    const std::string& clusters_path,
    const std::vector<eval::PredictionRecord>& records) {
  normalize::CuratedGroups curated;
  if (!clusters_path.empty()) {
    curated = normalize::CuratedGroups::load(clusters_path);
  }
  std::vector<std::string> names;
  for (const auto& record : records) {
    names.push_back(record.norm_truth);
    if (!record.norm_predicted.empty()) names.push_back(record.norm_predicted);
  }
  return normalize::cluster_ingredients(names, curated);
}

int run_stats(const CommonState& state, const std::string& dataset,
              std::ostream& out, std::ostream& err) {
  auto records = corpus::load_substitutions(dataset);
  auto stats = corpus::compute_split_stats(records);
  out << "train      " << stats.train << "\n"
      << "validation " << stats.validation << "\n"
      << "test       " << stats.test << "\n"
      << "total      " << stats.total << "\n";
  write_report(state, "stats",
               json{{"dataset", dataset},
                    {"stats",
                     {{"train", stats.train},
                      {"validation", stats.validation},
                      {"test", stats.test},
                      {"total", stats.total}}}},
               "phytosub-stats.report.json", err);
  return 0;
}

int run_filter(const CommonState& state, const std::string& subs_path,
               const std::string& recipes_path, const std::string& recipes_format,
               const std::string& backend_spec, int runs,
               const std::string& out_dir, std::ostream& out, std::ostream& err) {
  auto records = corpus::load_substitutions(subs_path);
  auto recipes = load_recipes_arg(recipes_path, recipes_format);
  corpus::RecipeIndex index(recipes);

  const ChatBackendSpec spec = parse_chat_backend(backend_spec);
  filtration::BackendFactory factory = [&](int run_index) {
    return make_chat_backend(spec, state.config,
                             spec.mock ? static_cast<std::uint64_t>(run_index) : 0);
  };

  filtration::FiltrationParams params;
  params.runs = runs;
  params.generation = {state.config.model_id, state.config.filter.temperature,
                       state.config.filter.max_output_tokens};

  gateway::SystemClock real_clock;
  gateway::VirtualClock virtual_clock;
  gateway::Clock& clock =
      spec.mock ? static_cast<gateway::Clock&>(virtual_clock)
                : static_cast<gateway::Clock&>(real_clock);

  auto filtration_runs = filtration::run_filtration(
      records, index, factory, state.config.gateway, params, clock);

  fs::create_directories(out_dir);
  json files = json::array();
  for (const auto& run : filtration_runs) {
    const fs::path run_path =
        fs::path(out_dir) / ("run_" + std::to_string(run.run_index) + ".json");
    io::write_text(run_path, run.to_json().dump(2) + "\n");
    files.push_back(run_path.string());

    std::vector<corpus::SubstitutionRecord> potential_bucket;
    for (std::size_t idx : run.potential) potential_bucket.push_back(records[idx]);
    const fs::path bucket_path =
        fs::path(out_dir) /
        ("run_" + std::to_string(run.run_index) + ".potential.jsonl");
    corpus::write_dataset(potential_bucket, bucket_path);
    files.push_back(bucket_path.string());
  }

  auto summary = filtration::summarize_runs(filtration_runs);
  auto print_stat = [&](const char* name, const filtration::SplitStatistic& s) {
    out << name << " " << two_decimals(s.mean) << " +/- " << two_decimals(s.std_dev)
        << "\n";
  };
  out << "kept per split over " << summary.n_runs << " run(s):\n";
  print_stat("train     ", summary.train);
  print_stat("validation", summary.validation);
  print_stat("test      ", summary.test);
  print_stat("total     ", summary.total);

  json runs_json = json::array();
  for (const auto& run : filtration_runs) {
    runs_json.push_back({{"run", run.run_index},
                         {"kept",
                          {{"train", run.kept_counts.train},
                           {"validation", run.kept_counts.validation},
                           {"test", run.kept_counts.test},
                           {"total", run.kept_counts.total}}}});
  }
  write_report(state, "filter",
               json{{"subs", subs_path},
                    {"recipes", recipes_path},
                    {"runs", runs_json},
                    {"summary",
                     {{"train", {{"mean", summary.train.mean},
                                 {"std", summary.train.std_dev}}},
                      {"validation", {{"mean", summary.validation.mean},
                                      {"std", summary.validation.std_dev}}},
                      {"test", {{"mean", summary.test.mean},
                                {"std", summary.test.std_dev}}},
                      {"total", {{"mean", summary.total.mean},
                                 {"std", summary.total.std_dev}}}}},
                    {"files", files}},
               (fs::path(out_dir) / "filter.report.json").string(), err);
  return 0;
}

int run_categorize(const CommonState& state, const std::string& in_path,
                   const std::string& out_path, const std::string& backend_spec,
                   const std::string& column, const std::string& cache_path,
                   std::ostream& out, std::ostream& err) {
  const ChatBackendSpec spec = parse_chat_backend(backend_spec);
  auto backend = make_chat_backend(spec, state.config, 0);
  gateway::SystemClock real_clock;
  gateway::VirtualClock virtual_clock;
  gateway::Clock& clock =
      spec.mock ? static_cast<gateway::Clock&>(virtual_clock)
                : static_cast<gateway::Clock&>(real_clock);

  fs::path cache_file = cache_path;
  if (cache_path.empty() && !state.config.cache.empty()) {
    cache_file = state.config.cache;
  }
  // temperature pinned to 0 for this subcommand
  gateway::GenerationParams params{state.config.model_id, 0.0,
                                   state.config.categorize.max_output_tokens};
  auto summary = categorize::categorize_all(
      in_path, out_path, *backend, state.config.gateway, clock, column,
      cache_file.empty() ? nullptr : &cache_file, params);

  out << "rows " << summary.rows << ", distinct queries "
      << summary.distinct_queries << ", flagged " << summary.flagged
      << ", cache hits " << summary.cache_hits << "\n";
  write_report(state, "categorize",
               json{{"in", in_path},
                    {"out", out_path},
                    {"rows", summary.rows},
                    {"distinct_queries", summary.distinct_queries},
                    {"flagged", summary.flagged},
                    {"cache_hits", summary.cache_hits}},
               out_path + ".report.json", err);
  return 0;
}

int run_export(const CommonState& state, const std::string& format,
               const std::string& subs_path, const std::string& recipes_path,
               const std::string& recipes_format, const std::string& out_path,
               const std::string& split, const std::string& filtration_dir,
               int explicit_run, std::uint64_t select_seed, std::ostream& out,
               std::ostream& err) {
  auto records = corpus::load_substitutions(subs_path);
  auto recipes = load_recipes_arg(recipes_path, recipes_format);
  corpus::RecipeIndex index(recipes);

  json selection = json::object();
  if (!filtration_dir.empty()) {
    std::vector<fs::path> run_files;
    for (int k = 1;; ++k) {
      fs::path candidate =
          fs::path(filtration_dir) / ("run_" + std::to_string(k) + ".json");
      if (!fs::exists(candidate)) break;
      run_files.push_back(candidate);
    }
    if (run_files.empty()) {
      throw Error(Errc::io_failure,
                  "no run_*.json files under " + filtration_dir);
    }
    std::size_t chosen =
        filtration::select_run(run_files.size(), explicit_run, select_seed);
    json run_json = json::parse(io::read_text(run_files[chosen]));
    std::set<std::size_t> kept;
    for (const auto& id : run_json.at("kept")) {
      kept.insert(id.get<std::size_t>());
    }
    std::vector<corpus::SubstitutionRecord> filtered;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (kept.count(i)) filtered.push_back(records[i]);
    }
    records = std::move(filtered);
    selection["run_file"] = run_files[chosen].string();
    selection["run"] = run_json.at("run");
  }

  if (split != "all") {
    const corpus::Split wanted = corpus::split_from_string(split);
    std::vector<corpus::SubstitutionRecord> filtered;
    for (auto& record : records) {
      if (record.split == wanted) filtered.push_back(std::move(record));
    }
    records = std::move(filtered);
  }

  finetune::ExportSummary summary;
  if (format == "prompt-completion") {
    summary = finetune::export_prompt_completion(records, index, out_path);
  } else if (format == "chat") {
    summary = finetune::export_chat(records, index, out_path);
  } else {
    throw Error(Errc::bad_config,
                "format must be prompt-completion or chat: " + format);
  }

  out << "exported " << summary.records << " record(s) to " << out_path << "\n";
  for (std::size_t idx : summary.over_limit) {
    err << "warning: record " << idx << " exceeds the 512-token estimate\n";
  }
  write_report(state, "export",
               json{{"format", format},
                    {"subs", subs_path},
                    {"out", out_path},
                    {"split", split},
                    {"records", summary.records},
                    {"over_limit", summary.over_limit},
                    {"selection", selection}},
               out_path + ".report.json", err);
  return 0;
}

int run_manifest(const CommonState& state, const std::string& model,
                 const std::string& variant, std::string out_path,
                 std::ostream& out, std::ostream& err) {
  const auto kind = finetune::model_kind_from_string(model);
  const auto dataset_variant = finetune::variant_from_string(variant);
  const auto manifest = finetune::emit_manifest(kind, dataset_variant);
  if (out_path.empty()) {
    out_path = finetune::manifest_filename(kind, dataset_variant);
  }
  finetune::write_manifest(manifest, out_path);
  out << manifest.to_json().dump(2) << "\n";
  write_report(state, "manifest",
               json{{"manifest", manifest.to_json()}, {"out", out_path}},
               out_path + ".report.json", err);
  return 0;
}

int run_predict_baseline(const CommonState& state, const std::string& train_path,
                         const std::string& test_path, const std::string& out_path,
                         std::ostream& out, std::ostream& err) {
  auto train_records = corpus::load_substitutions(train_path);
  std::vector<corpus::SubstitutionRecord> train_split;
  for (auto& record : train_records) {
    if (record.split == corpus::Split::train) train_split.push_back(record);
  }
  auto baseline = eval::FrequencyBaseline::train(train_split);

  auto test_records = corpus::load_substitutions(test_path);
  std::string lines;
  std::size_t n_test = 0, abstained = 0;
  for (const auto& record : test_records) {
    if (record.split != corpus::Split::test) continue;
    ++n_test;
    const std::string source = normalize::normalize_name(record.source);
    auto predicted = baseline.predict(source);
    if (!predicted) ++abstained;
    lines += json{{"original", record.source},
                  {"truth", record.target},
                  {"predicted", predicted.value_or("")}}
                 .dump();
    lines.push_back('\n');
  }
  io::write_text(out_path, lines);
  out << "predicted " << n_test << " record(s), " << abstained
      << " abstention(s)\n";
  write_report(state, "predict-baseline",
               json{{"train", train_path},
                    {"test", test_path},
                    {"out", out_path},
                    {"train_records", train_split.size()},
                    {"test_records", n_test},
                    {"abstained", abstained}},
               out_path + ".report.json", err);
  return 0;
}

int run_eval(const CommonState& state, const std::vector<std::string>& pred_paths,
             const std::string& format, const std::string& clusters_path,
             std::ostream& out, std::ostream& err) {
  const eval::PredictionFormat fmt = format == "tsv"
                                         ? eval::PredictionFormat::tsv
                                         : eval::PredictionFormat::json_lines;
  if (format != "tsv" && format != "jsonl") {
    throw Error(Errc::bad_config, "format must be jsonl or tsv: " + format);
  }
  std::vector<std::vector<eval::PredictionRecord>> runs;
  std::vector<eval::PredictionRecord> all_records;
  for (const auto& path : pred_paths) {
    runs.push_back(eval::parse_predictions(path, fmt));
    all_records.insert(all_records.end(), runs.back().begin(), runs.back().end());
  }
  auto clustering = load_clustering(clusters_path, all_records);
  auto report = eval::evaluate_runs(runs, clustering);

  out << "Run\tHit@1 (%)\n";
  for (std::size_t i = 0; i < report.per_run.size(); ++i) {
    out << (i + 1) << "\t" << two_decimals(report.per_run[i]) << "\n";
  }
  out << "Final\t" << two_decimals(report.mean) << " +/- "
      << two_decimals(report.std_dev) << "\n";

  write_report(state, "eval",
               json{{"predictions", pred_paths},
                    {"clusters", clusters_path},
                    {"report", report.to_json()}},
               "phytosub-eval.report.json", err);
  return 0;
}

std::unique_ptr<enrich::SubstitutionBackend> make_substitution_backend(
    const std::string& spec) {
  if (spec.rfind("map:", 0) == 0) {
    return std::make_unique<enrich::ScriptedSubstitutions>(
        enrich::ScriptedSubstitutions::from_file(spec.substr(4)));
  }
  if (spec.rfind("baseline:", 0) == 0) {
    auto records = corpus::load_substitutions(spec.substr(9));
    std::vector<corpus::SubstitutionRecord> train_split;
    for (auto& record : records) {
      if (record.split == corpus::Split::train) train_split.push_back(record);
    }
    return std::make_unique<enrich::BaselineSubstitutions>(
        eval::FrequencyBaseline::train(train_split));
  }
  throw Error(Errc::bad_config,
              "backend must be \"map:<script.json>\" or \"baseline:<subs.jsonl>\": " +
                  spec);
}

int run_enrich(const CommonState& state, const std::string& recipes_path,
               const std::string& recipes_format, const std::string& backend_spec,
               const std::string& table_path, const std::string& networks_arg,
               bool salad_only, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  auto recipes = load_recipes_arg(recipes_path, recipes_format);
  auto table = enrich::PhytoTable::load(table_path);
  auto networks = networks_arg.empty() ? enrich::all_networks()
                                       : enrich::parse_networks(networks_arg);
  auto backend = make_substitution_backend(backend_spec);
  auto outcome =
      enrich::enrich_corpus(recipes, *backend, table, networks, salad_only);
  enrich::write_enriched(outcome, out_path);

  out << outcome.report.n_pairs << " enriching pair(s) across "
      << outcome.report.n_unique_recipes << " recipe(s)\n";
  write_report(state, "enrich",
               json{{"recipes", recipes_path},
                    {"table", table_path},
                    {"salad_only", salad_only},
                    {"out", out_path},
                    {"report", outcome.report.to_json()}},
               out_path + ".report.json", err);
  return 0;
}

int run_rank(const CommonState& state, const std::string& recipes_path,
             const std::string& recipes_format, const std::string& table_path,
             const std::string& networks_arg, bool salad_only, int top,
             std::ostream& out, std::ostream& err) {
  auto recipes = load_recipes_arg(recipes_path, recipes_format);
  auto table = enrich::PhytoTable::load(table_path);
  auto networks = networks_arg.empty() ? enrich::all_networks()
                                       : enrich::parse_networks(networks_arg);
  std::vector<corpus::Recipe> pool;
  if (salad_only) {
    pool = enrich::filter_salads(recipes);
  } else {
    pool.assign(recipes.begin(), recipes.end());
  }
  auto ranked = enrich::rank_recipes(pool, table, networks);
  json ranking = json::array();
  std::size_t shown = 0;
  for (const auto& entry : ranked) {
    if (top > 0 && shown >= static_cast<std::size_t>(top)) break;
    out << entry.recipe_id << "\t" << two_decimals(entry.score) << "\t"
        << entry.title << "\n";
    ranking.push_back({{"recipe_id", entry.recipe_id},
                       {"title", entry.title},
                       {"score", entry.score}});
    ++shown;
  }
  write_report(state, "rank",
               json{{"recipes", recipes_path},
                    {"table", table_path},
                    {"salad_only", salad_only},
                    {"ranking", ranking}},
               "phytosub-rank.report.json", err);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"phytosub: ingredient-substitution dataset tooling"};
  app.require_subcommand(0, 1);

  CommonState state;

  // stats
  std::string stats_dataset;
  auto* stats_cmd = app.add_subcommand("stats", "split statistics of a dataset");
  stats_cmd->add_option("dataset", stats_dataset, "substitution JSONL file")
      ->required();
  add_common_options(stats_cmd, state);

  // filter
  std::string filter_subs, filter_recipes, filter_recipes_format = "jsonl";
  std::string filter_backend = "http", filter_out = "filtration";
  int filter_runs = 5;
  auto* filter_cmd =
      app.add_subcommand("filter", "label substitutions Correct/Potential/"
                                   "Incorrect and keep the Correct ones");
  filter_cmd->add_option("--subs", filter_subs, "substitution JSONL file")
      ->required();
  filter_cmd->add_option("--recipes", filter_recipes, "recipe corpus")->required();
  filter_cmd->add_option("--recipes-format", filter_recipes_format,
                         "jsonl or legacy");
  filter_cmd->add_option("--backend", filter_backend,
                         "http or mock:<script.json>");
  filter_cmd->add_option("--runs", filter_runs, "number of stochastic runs");
  filter_cmd->add_option("--out", filter_out, "output directory");
  add_common_options(filter_cmd, state);

  // categorize
  std::string cat_in, cat_out, cat_backend = "http", cat_column = "ingredient";
  std::string cat_cache;
  auto* cat_cmd = app.add_subcommand(
      "categorize", "append a food category column to an ingredient CSV");
  cat_cmd->add_option("--in", cat_in, "input CSV")->required();
  cat_cmd->add_option("--out", cat_out, "output CSV")->required();
  cat_cmd->add_option("--backend", cat_backend, "http or mock:<script.json>");
  cat_cmd->add_option("--column", cat_column, "ingredient-name column");
  cat_cmd->add_option("--cache", cat_cache, "persistent category cache (JSON)");
  add_common_options(cat_cmd, state);

  // export
  std::string export_format, export_subs, export_recipes;
  std::string export_recipes_format = "jsonl", export_out, export_split = "all";
  std::string export_filtration_dir;
  int export_run = 0;
  std::uint64_t export_seed = 0;
  auto* export_cmd =
      app.add_subcommand("export", "write fine-tune JSONL files");
  export_cmd->add_option("--format", export_format,
                         "prompt-completion or chat")->required();
  export_cmd->add_option("--subs", export_subs, "substitution JSONL file")
      ->required();
  export_cmd->add_option("--recipes", export_recipes, "recipe corpus")->required();
  export_cmd->add_option("--recipes-format", export_recipes_format,
                         "jsonl or legacy");
  export_cmd->add_option("--out", export_out, "output JSONL path")->required();
  export_cmd->add_option("--split", export_split,
                         "train, validation, test, or all");
  export_cmd->add_option("--filtration-dir", export_filtration_dir,
                         "restrict to kept records of a filtration run");
  export_cmd->add_option("--run", export_run, "explicit run to use (1-based)");
  export_cmd->add_option("--select-seed", export_seed,
                         "seed for a uniform run choice");
  add_common_options(export_cmd, state);

  // manifest
  std::string manifest_model, manifest_variant, manifest_out;
  auto* manifest_cmd =
      app.add_subcommand("manifest", "emit a training hyperparameter manifest");
  manifest_cmd->add_option("--model", manifest_model,
                           "davinci, gpt35, or tinyllama")->required();
  manifest_cmd->add_option("--variant", manifest_variant,
                           "unfiltered or filtered")->required();
  manifest_cmd->add_option("--out", manifest_out, "manifest JSON path");
  add_common_options(manifest_cmd, state);

  // predict-baseline
  std::string baseline_train, baseline_test, baseline_out;
  auto* baseline_cmd = app.add_subcommand(
      "predict-baseline", "frequency-baseline predictions for a test split");
  baseline_cmd->add_option("--train", baseline_train, "training records")
      ->required();
  baseline_cmd->add_option("--test", baseline_test, "test records")->required();
  baseline_cmd->add_option("--out", baseline_out, "predictions JSONL path")
      ->required();
  add_common_options(baseline_cmd, state);

  // eval
  std::vector<std::string> eval_preds;
  std::string eval_format = "jsonl", eval_clusters;
  auto* eval_cmd =
      app.add_subcommand("eval", "cluster-aware Hit@1 over prediction files");
  eval_cmd->add_option("--preds", eval_preds, "prediction file(s), one per run")
      ->required();
  eval_cmd->add_option("--format", eval_format, "jsonl or tsv");
  eval_cmd->add_option("--clusters", eval_clusters, "curated cluster CSV");
  add_common_options(eval_cmd, state);

  // enrich
  std::string enrich_recipes, enrich_recipes_format = "jsonl";
  std::string enrich_backend, enrich_table, enrich_networks, enrich_out;
  bool enrich_salads = false;
  auto* enrich_cmd = app.add_subcommand(
      "enrich", "substitute ingredients to raise phytochemical scores");
  enrich_cmd->add_option("--recipes", enrich_recipes, "recipe corpus")->required();
  enrich_cmd->add_option("--recipes-format", enrich_recipes_format,
                         "jsonl or legacy");
  enrich_cmd->add_option("--backend", enrich_backend,
                         "map:<script.json> or baseline:<subs.jsonl>")
      ->required();
  enrich_cmd->add_option("--table", enrich_table, "phytochemical CSV")->required();
  enrich_cmd->add_option("--networks", enrich_networks,
                         "comma-separated targets (default: all)");
  enrich_cmd->add_flag("--salad-only", enrich_salads, "only titled salads");
  enrich_cmd->add_option("--out", enrich_out, "enriched recipes JSONL")->required();
  add_common_options(enrich_cmd, state);

  // rank
  std::string rank_recipes, rank_recipes_format = "jsonl", rank_table;
  std::string rank_networks;
  bool rank_salads = false;
  int rank_top = 0;
  auto* rank_cmd = app.add_subcommand(
      "rank", "rank recipes by cumulative phytochemical score");
  rank_cmd->add_option("--recipes", rank_recipes, "recipe corpus")->required();
  rank_cmd->add_option("--recipes-format", rank_recipes_format,
                       "jsonl or legacy");
  rank_cmd->add_option("--table", rank_table, "phytochemical CSV")->required();
  rank_cmd->add_option("--networks", rank_networks,
                       "comma-separated targets (default: all)");
  rank_cmd->add_flag("--salad-only", rank_salads, "only titled salads");
  rank_cmd->add_option("--top", rank_top, "print only the top N");
  add_common_options(rank_cmd, state);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 1;
  }

  try {
    state.finalize();
    if (stats_cmd->parsed()) {
      return run_stats(state, stats_dataset, out, err);
    }
    if (filter_cmd->parsed()) {
      return run_filter(state, filter_subs, filter_recipes, filter_recipes_format,
                        filter_backend, filter_runs, filter_out, out, err);
    }
    if (cat_cmd->parsed()) {
      return run_categorize(state, cat_in, cat_out, cat_backend, cat_column,
                            cat_cache, out, err);
    }
    if (export_cmd->parsed()) {
      return run_export(state, export_format, export_subs, export_recipes,
                        export_recipes_format, export_out, export_split,
                        export_filtration_dir, export_run, export_seed, out, err);
    }
    if (manifest_cmd->parsed()) {
      return run_manifest(state, manifest_model, manifest_variant, manifest_out,
                          out, err);
    }
    if (baseline_cmd->parsed()) {
      return run_predict_baseline(state, baseline_train, baseline_test,
                                  baseline_out, out, err);
    }
    if (eval_cmd->parsed()) {
      return run_eval(state, eval_preds, eval_format, eval_clusters, out, err);
    }
    if (enrich_cmd->parsed()) {
      return run_enrich(state, enrich_recipes, enrich_recipes_format,
                        enrich_backend, enrich_table, enrich_networks,
                        enrich_salads, enrich_out, out, err);
    }
    if (rank_cmd->parsed()) {
      return run_rank(state, rank_recipes, rank_recipes_format, rank_table,
                      rank_networks, rank_salads, rank_top, out, err);
    }
    out << app.help();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::endpoint_unreachable ? 3 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace phytosub::cli
