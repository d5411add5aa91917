#include "phytosub/config.hpp"

#include "phytosub/error.hpp"
#include "phytosub/io.hpp"

namespace phytosub::cli {

namespace {

using nlohmann::json;

TaskParams task_params_from_json(const json& value, const TaskParams& base,
                                 const std::string& where) {
  TaskParams params = base;
  for (const auto& [key, entry] : value.items()) {
    if (key == "temperature") {
      params.temperature = entry.get<double>();
    } else if (key == "max_output_tokens") {
      params.max_output_tokens = entry.get<int>();
      if (params.max_output_tokens < 1) {
        throw Error(Errc::bad_config, where + ".max_output_tokens must be >= 1");
      }
    } else {
      throw Error(Errc::bad_config, "unknown config key: " + where + "." + key);
    }
  }
  return params;
}

}  // namespace

GlobalConfig GlobalConfig::load(const std::filesystem::path& path) {
  json value = json::parse(io::read_text(path), nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    throw Error(Errc::bad_config, "config is not a JSON object: " + path.string());
  }
  return from_json(value);
}

GlobalConfig GlobalConfig::from_json(const nlohmann::json& value) {
  GlobalConfig config;
  for (const auto& [key, entry] : value.items()) {
    if (key == "endpoint") {
      config.gateway.endpoint = entry.get<std::string>();
    } else if (key == "api_key_env") {
      config.gateway.api_key_env = entry.get<std::string>();
    } else if (key == "batch_size") {
      config.gateway.batch_size = entry.get<int>();
      if (config.gateway.batch_size < 1) {
        throw Error(Errc::bad_config, "batch_size must be >= 1");
      }
    } else if (key == "max_retries") {
      config.gateway.max_retries = entry.get<int>();
      if (config.gateway.max_retries < 0) {
        throw Error(Errc::bad_config, "max_retries must be >= 0");
      }
    } else if (key == "rps_cap") {
      config.gateway.rps_cap = entry.get<double>();
      if (!(config.gateway.rps_cap > 0)) {
        throw Error(Errc::bad_config, "rps_cap must be positive");
      }
    } else if (key == "model_id") {
      config.model_id = entry.get<std::string>();
    } else if (key == "filter") {
      config.filter = task_params_from_json(entry, config.filter, "filter");
    } else if (key == "categorize") {
      config.categorize =
          task_params_from_json(entry, config.categorize, "categorize");
    } else if (key == "paths") {
      for (const auto& [path_key, path_value] : entry.items()) {
        if (path_key == "curated_clusters") {
          config.curated_clusters = path_value.get<std::string>();
        } else if (path_key == "phyto_table") {
          config.phyto_table = path_value.get<std::string>();
        } else if (path_key == "cache") {
          config.cache = path_value.get<std::string>();
        } else {
          throw Error(Errc::bad_config, "unknown config key: paths." + path_key);
        }
      }
    } else {
      throw Error(Errc::bad_config, "unknown config key: " + key);
    }
  }
  return config;
}

nlohmann::json GlobalConfig::to_json() const {
  return json{{"endpoint", gateway.endpoint},
              {"api_key_env", gateway.api_key_env},
              {"batch_size", gateway.batch_size},
              {"max_retries", gateway.max_retries},
              {"rps_cap", gateway.rps_cap},
              {"model_id", model_id},
              {"filter",
               {{"temperature", filter.temperature},
                {"max_output_tokens", filter.max_output_tokens}}},
              {"categorize",
               {{"temperature", categorize.temperature},
                {"max_output_tokens", categorize.max_output_tokens}}},
              {"paths",
               {{"curated_clusters", curated_clusters.string()},
                {"phyto_table", phyto_table.string()},
                {"cache", cache.string()}}}};
}

std::string GlobalConfig::hash() const { return io::fnv1a64_hex(to_json().dump()); }

}  // namespace phytosub::cli
