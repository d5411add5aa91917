#include "phytosub/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>

#include "phytosub/error.hpp"
#include "phytosub/io.hpp"

namespace phytosub::gateway {

namespace {

using nlohmann::json;

constexpr double kBackoffBaseSeconds = 1.0;
constexpr double kBackoffFactor = 2.0;

bool is_transport_failure(const Failure& failure) {
  switch (failure.kind) {
    case FailureKind::timeout:
    case FailureKind::rate_limited:
      return true;
    case FailureKind::http_status:
      return failure.http_code >= 500;
    case FailureKind::empty_response:
      return false;
  }
  return false;
}

Failure failure_from_name(const std::string& name) {
  if (name == "timeout") return {FailureKind::timeout, 0, "scripted"};
  if (name == "rate_limited") return {FailureKind::rate_limited, 0, "scripted"};
  if (name.rfind("http_", 0) == 0) {
    return {FailureKind::http_status, std::atoi(name.c_str() + 5), "scripted"};
  }
  return {FailureKind::empty_response, 0, "scripted"};
}

}  // namespace

std::string to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::rate_limited: return "RateLimited";
    case FailureKind::timeout: return "Timeout";
    case FailureKind::http_status: return "HttpStatus";
    case FailureKind::empty_response: return "EmptyResponse";
  }
  return "Timeout";
}

nlohmann::json messages_to_json(const MessageList& messages) {
  json out = json::array();
  for (const auto& message : messages) {
    out.push_back({{"role", message.role}, {"content", message.content}});
  }
  return out;
}

std::string prompt_key(const MessageList& messages) {
  return io::fnv1a64_hex(messages_to_json(messages).dump());
}

double SystemClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for(double seconds) {
  if (seconds <= 0) return;
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

std::vector<ChatExchange> complete_batch(std::vector<ChatExchange> requests,
                                         const GenerationParams& params,
                                         const GatewayConfig& config,
                                         ChatBackend& backend, Clock& clock,
                                         BatchTelemetry* telemetry) {
  if (config.batch_size < 1) {
    throw Error(Errc::bad_config, "batch_size must be >= 1");
  }
  if (!(config.rps_cap > 0)) {
    throw Error(Errc::bad_config, "rps_cap must be positive");
  }
  if (params.max_output_tokens < 1) {
    throw Error(Errc::bad_config, "max_output_tokens must be >= 1");
  }
  if (!std::isfinite(params.temperature) || params.temperature < 0) {
    throw Error(Errc::bad_config, "temperature must be finite and >= 0");
  }
  {
    std::set<std::int64_t> ids;
    for (const auto& request : requests) {
      if (!ids.insert(request.correlation_id).second) {
        throw std::invalid_argument("duplicate correlation_id " +
                                    std::to_string(request.correlation_id));
      }
    }
  }

  const double min_interval = 1.0 / config.rps_cap;
  double next_allowed = clock.now();
  std::mt19937_64 jitter_rng(std::random_device{}());
  BatchTelemetry local;
  BatchTelemetry& trace = telemetry ? *telemetry : local;
  trace.waves = 0;
  trace.dispatch_times.clear();

  // Dispatches are serialized; at most one request is in flight, within the
  // batch_size bound.
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (std::size_t wave_start = 0; wave_start < requests.size();
       wave_start += batch) {
    ++trace.waves;
    const std::size_t wave_end = std::min(wave_start + batch, requests.size());
    for (std::size_t i = wave_start; i < wave_end; ++i) {
      ChatExchange& item = requests[i];
      for (int attempt = 0;; ++attempt) {
        const double now = clock.now();
        if (now < next_allowed) clock.sleep_for(next_allowed - now);
        trace.dispatch_times.push_back(clock.now());
        next_allowed = clock.now() + min_interval;

        auto reply = backend.complete(item.correlation_id, item.prompt, params);
        if (reply.content && !reply.content->empty()) {
          item.response = std::move(reply.content);
          item.failure.reset();
          break;
        }
        Failure failure = reply.failure.value_or(
            Failure{FailureKind::empty_response, 0, "empty completion"});
        if (attempt >= config.max_retries) {
          item.failure = std::move(failure);
          item.response.reset();
          break;
        }
        double backoff = kBackoffBaseSeconds;
        for (int k = 0; k < attempt; ++k) backoff *= kBackoffFactor;
        if (!clock.is_virtual()) {
          std::uniform_real_distribution<double> jitter(0.5, 1.5);
          backoff *= jitter(jitter_rng);
        }
        clock.sleep_for(backoff);
      }
    }
  }

  if (!requests.empty()) {
    bool any_success = false;
    bool all_transport = true;
    for (const auto& item : requests) {
      if (item.ok()) {
        any_success = true;
        break;
      }
      if (!item.failure || !is_transport_failure(*item.failure)) {
        all_transport = false;
      }
    }
    if (!any_success && all_transport) {
      throw Error(Errc::endpoint_unreachable,
                  "no request succeeded against " + config.endpoint);
    }
  }
  return requests;
}

MockBackend::MockBackend(nlohmann::json script, std::uint64_t seed)
    : script_(std::move(script)), seed_(seed) {
  if (!script_.is_object()) {
    throw Error(Errc::bad_config, "mock script must be a JSON object");
  }
  for (const auto& [key, value] : script_.items()) {
    if (key != "responses" && key != "default" && key != "failures") {
      throw Error(Errc::bad_config, "unknown mock script key: " + key);
    }
    (void)value;
  }
}

MockBackend MockBackend::from_file(const std::filesystem::path& path,
                                   std::uint64_t seed) {
  json script = json::parse(io::read_text(path), nullptr, false);
  if (script.is_discarded()) {
    throw Error(Errc::bad_config, "mock script is not valid JSON: " + path.string());
  }
  return MockBackend(std::move(script), seed);
}

void MockBackend::fail_correlation_ids(std::set<std::int64_t> ids,
                                       FailureKind kind) {
  fail_ids_ = std::move(ids);
  fail_kind_ = kind;
}

ChatBackend::Reply MockBackend::complete(std::int64_t correlation_id,
                                         const MessageList& prompt,
                                         const GenerationParams& params) {
  (void)params;
  if (fail_ids_.count(correlation_id)) {
    return {std::nullopt, Failure{fail_kind_, 0, "scripted failure"}};
  }
  const std::string key = prompt_key(prompt);
  if (auto failures = script_.find("failures"); failures != script_.end()) {
    if (auto it = failures->find(key); it != failures->end()) {
      return {std::nullopt, failure_from_name(it->get<std::string>())};
    }
  }
  const json* entry = nullptr;
  if (auto responses = script_.find("responses"); responses != script_.end()) {
    if (auto it = responses->find(key); it != responses->end()) {
      entry = &*it;
    }
  }
  if (!entry) {
    if (auto fallback = script_.find("default"); fallback != script_.end()) {
      entry = &*fallback;
    }
  }
  if (!entry) {
    return {std::nullopt,
            Failure{FailureKind::empty_response, 0, "prompt not in script"}};
  }
  if (entry->is_string()) {
    return {entry->get<std::string>(), std::nullopt};
  }
  if (entry->is_array() && !entry->empty()) {
    const std::size_t index = static_cast<std::size_t>(seed_ % entry->size());
    return {(*entry)[index].get<std::string>(), std::nullopt};
  }
  return {std::nullopt,
          Failure{FailureKind::empty_response, 0, "malformed script entry"}};
}

HttpBackend::HttpBackend(GatewayConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  std::size_t scheme_end = url.find("://");
  std::size_t path_start = std::string::npos;
  if (scheme_end != std::string::npos) {
    path_start = url.find('/', scheme_end + 3);
  }
  if (path_start == std::string::npos) {
    scheme_host_ = url;
    path_ = "/v1/chat/completions";
  } else {
    scheme_host_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    api_key_ = key;
  }
}

ChatBackend::Reply HttpBackend::complete(std::int64_t correlation_id,
                                         const MessageList& prompt,
                                         const GenerationParams& params) {
  (void)correlation_id;
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  json body{{"model", params.model_id},
            {"messages", messages_to_json(prompt)},
            {"temperature", params.temperature},
            {"max_tokens", params.max_output_tokens}};
  auto result = client.Post(path_, headers, body.dump(), "application/json");
  if (!result) {
    // connection refused, DNS failure, and timeouts all land here
    return {std::nullopt,
            Failure{FailureKind::timeout, 0, httplib::to_string(result.error())}};
  }
  if (result->status == 429) {
    return {std::nullopt, Failure{FailureKind::rate_limited, 429, "429"}};
  }
  if (result->status < 200 || result->status >= 300) {
    return {std::nullopt, Failure{FailureKind::http_status, result->status,
                                  "HTTP " + std::to_string(result->status)}};
  }
  json payload = json::parse(result->body, nullptr, false);
  if (payload.is_discarded()) {
    return {std::nullopt,
            Failure{FailureKind::empty_response, 0, "unparseable body"}};
  }
  try {
    const auto& choices = payload.at("choices");
    if (choices.empty()) {
      return {std::nullopt, Failure{FailureKind::empty_response, 0, "no choices"}};
    }
    std::string content = choices.at(0).at("message").at("content").get<std::string>();
    if (content.empty()) {
      return {std::nullopt,
              Failure{FailureKind::empty_response, 0, "empty content"}};
    }
    return {std::move(content), std::nullopt};
  } catch (const json::exception&) {
    return {std::nullopt,
            Failure{FailureKind::empty_response, 0, "unexpected response shape"}};
  }
}

}  // namespace phytosub::gateway
