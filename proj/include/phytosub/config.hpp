#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "phytosub/gateway.hpp"

namespace phytosub::cli {

struct TaskParams {
  double temperature = 0.0;
  int max_output_tokens = 10;
};

// The one config file the CLI reads. Unknown keys anywhere are rejected;
// defaults carry the canonical temperatures (filter 0.5, categorize 0) and
// batch size 100.
struct GlobalConfig {
  gateway::GatewayConfig gateway;
  std::string model_id = "gpt-3.5-turbo";
  TaskParams filter{0.5, 10};
  TaskParams categorize{0.0, 10};
  std::filesystem::path curated_clusters;
  std::filesystem::path phyto_table;
  std::filesystem::path cache;

  static GlobalConfig defaults() { return GlobalConfig{}; }
  static GlobalConfig load(const std::filesystem::path& path);
  static GlobalConfig from_json(const nlohmann::json& value);

  nlohmann::json to_json() const;  // canonical form used for hashing
  std::string hash() const;        // fnv1a64 over the canonical JSON
};

}  // namespace phytosub::cli
