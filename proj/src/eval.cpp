#include "phytosub/eval.hpp"

#include <algorithm>
#include <cmath>

#include "phytosub/error.hpp"
#include "phytosub/io.hpp"

namespace phytosub::eval {

namespace {

using nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find('\t', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

}  // namespace

std::string normalize_prediction(std::string_view predicted,
                                 const normalize::RuleTable& rules) {
  std::size_t clause_end = predicted.find_first_of(",.\n");
  if (clause_end != std::string_view::npos) {
    predicted = predicted.substr(0, clause_end);
  }
  return normalize::normalize_name(predicted, rules);
}

PredictionRecord make_prediction_record(std::string original, std::string truth,
                                        std::string predicted,
                                        const normalize::RuleTable& rules) {
  PredictionRecord record;
  record.norm_original = normalize::normalize_name(original, rules);
  record.norm_truth = normalize::normalize_name(truth, rules);
  record.norm_predicted = normalize_prediction(predicted, rules);
  record.original = std::move(original);
  record.truth = std::move(truth);
  record.predicted = std::move(predicted);
  return record;
}

std::vector<PredictionRecord> parse_predictions(const std::filesystem::path& path,
                                                PredictionFormat format,
                                                const normalize::RuleTable& rules) {
  auto lines = io::read_lines(path);
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_number = i + 1;
    std::string original, truth, predicted;
    if (format == PredictionFormat::json_lines) {
      json value = json::parse(lines[i], nullptr, false);
      if (value.is_discarded() || !value.is_object()) {
        throw Error(Errc::malformed_line,
                    "line " + std::to_string(line_number) + ": not a JSON object");
      }
      for (const char* key : {"original", "truth", "predicted"}) {
        if (!value.contains(key) || !value[key].is_string()) {
          throw Error(Errc::malformed_line,
                      "line " + std::to_string(line_number) +
                          ": missing string field \"" + key + "\"");
        }
      }
      original = value["original"].get<std::string>();
      truth = value["truth"].get<std::string>();
      predicted = value["predicted"].get<std::string>();
    } else {
      auto fields = split_tabs(lines[i]);
      if (fields.size() != 3) {
        throw Error(Errc::malformed_line,
                    "line " + std::to_string(line_number) + ": expected 3 "
                    "tab-separated fields, got " + std::to_string(fields.size()));
      }
      original = fields[0];
      truth = fields[1];
      predicted = fields[2];
    }
    PredictionRecord record =
        make_prediction_record(std::move(original), std::move(truth),
                               std::move(predicted), rules);
    if (record.norm_original.empty() || record.norm_truth.empty()) {
      throw Error(Errc::malformed_line,
                  "line " + std::to_string(line_number) +
                      ": original or truth normalizes to empty");
    }
    records.push_back(std::move(record));
  }
  return records;
}

nlohmann::json EvaluationReport::to_json() const {
  return json{{"n_records", n_records},
              {"n_hits", n_hits},
              {"hit_at_1", round_half_up(hit_at_1, 2)},
              {"per_run", per_run},
              {"mean", round_half_up(mean, 2)},
              {"std", round_half_up(std_dev, 2)},
              {"single_run", single_run}};
}

EvaluationReport hit_at_1(std::span<const PredictionRecord> records,
                          const normalize::IngredientClustering& clustering) {
  if (records.empty()) {
    throw Error(Errc::empty_input, "no prediction records to score");
  }
  EvaluationReport report;
  report.n_records = records.size();
  for (const auto& record : records) {
    if (record.norm_predicted.empty()) continue;  // abstain or junk: a miss
    if (record.norm_predicted == record.norm_truth ||
        clustering.same_cluster(record.norm_predicted, record.norm_truth)) {
      ++report.n_hits;
    }
  }
  report.hit_at_1 = 100.0 * static_cast<double>(report.n_hits) /
                    static_cast<double>(report.n_records);
  report.per_run = {report.hit_at_1};
  report.mean = report.hit_at_1;
  report.std_dev = 0.0;
  report.single_run = true;
  return report;
}

EvaluationReport evaluate_runs(
    const std::vector<std::vector<PredictionRecord>>& runs,
    const normalize::IngredientClustering& clustering) {
  if (runs.empty()) {
    throw Error(Errc::empty_input, "no runs to score");
  }
  EvaluationReport report;
  for (const auto& run : runs) {
    EvaluationReport single = hit_at_1(run, clustering);
    report.n_records += single.n_records;
    report.n_hits += single.n_hits;
    report.per_run.push_back(single.hit_at_1);
  }
  report.hit_at_1 = 100.0 * static_cast<double>(report.n_hits) /
                    static_cast<double>(report.n_records);
  Aggregate aggregate = aggregate_runs(report.per_run);
  report.mean = aggregate.mean;
  report.std_dev = aggregate.std_dev;
  report.single_run = aggregate.single_run;
  return report;
}

Aggregate aggregate_runs(std::span<const double> values) {
  if (values.empty()) {
    throw Error(Errc::empty_input, "aggregate_runs needs at least one value");
  }
  Aggregate out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - out.mean) * (v - out.mean);
    out.std_dev = std::sqrt(acc / (n - 1.0));
  } else {
    out.single_run = true;
  }
  return out;
}

double round_half_up(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

FrequencyBaseline FrequencyBaseline::train(
    std::span<const corpus::SubstitutionRecord> records,
    const normalize::RuleTable& rules) {
  if (records.empty()) {
    throw Error(Errc::empty_input, "cannot train a baseline on no records");
  }
  std::map<std::string, std::map<std::string, int>> counts;
  for (const auto& record : records) {
    const std::string source = normalize::normalize_name(record.source, rules);
    const std::string target = normalize::normalize_name(record.target, rules);
    if (source.empty() || target.empty()) continue;
    ++counts[source][target];
  }
  FrequencyBaseline baseline;
  for (const auto& [source, targets] : counts) {
    Entry best;
    for (const auto& [target, count] : targets) {
      // std::map iterates targets in lexicographic order, so a strict >
      // keeps the smallest target on ties.
      if (count > best.support) {
        best = {target, count};
      }
    }
    baseline.table_[source] = best;
  }
  return baseline;
}

std::optional<std::string> FrequencyBaseline::predict(
    std::string_view normalized_source) const {
  auto it = table_.find(std::string(normalized_source));
  if (it == table_.end()) return std::nullopt;
  return it->second.target;
}

}  // namespace phytosub::eval
