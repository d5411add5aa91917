#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace phytosub::gateway {

struct GenerationParams {
  std::string model_id;
  double temperature = 0.0;
  int max_output_tokens = 1;
};

enum class FailureKind { rate_limited, timeout, http_status, empty_response };

std::string to_string(FailureKind kind);

struct Failure {
  FailureKind kind = FailureKind::timeout;
  int http_code = 0;  // set for http_status
  std::string detail;
};

struct Message {
  std::string role;  // "system" or "user"
  std::string content;

  bool operator==(const Message&) const = default;
};

using MessageList = std::vector<Message>;

nlohmann::json messages_to_json(const MessageList& messages);

// Stable key for a prompt: FNV-1a over the canonical JSON of its messages.
// Mock scripts are keyed by this.
std::string prompt_key(const MessageList& messages);

struct ChatExchange {
  std::int64_t correlation_id = 0;
  MessageList prompt;
  std::optional<std::string> response;
  std::optional<Failure> failure;

  bool ok() const { return response.has_value(); }
};

struct GatewayConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "PHYTOSUB_API_KEY";
  int batch_size = 100;
  int max_retries = 2;
  double rps_cap = 10.0;
};

// Monotonic seconds plus sleep; the virtual variant advances instantly so
// throttle and backoff schedules are testable.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_for(double seconds) = 0;
  virtual bool is_virtual() const { return false; }
};

class SystemClock : public Clock {
 public:
  double now() override;
  void sleep_for(double seconds) override;
};

class VirtualClock : public Clock {
 public:
  double now() override { return now_; }
  void sleep_for(double seconds) override {
    if (seconds > 0) now_ += seconds;
  }
  bool is_virtual() const override { return true; }

 private:
  double now_ = 0.0;
};

class ChatBackend {
 public:
  struct Reply {
    std::optional<std::string> content;
    std::optional<Failure> failure;
  };

  virtual ~ChatBackend() = default;
  // One completion attempt; problems are reported in the reply, never thrown.
  virtual Reply complete(std::int64_t correlation_id, const MessageList& prompt,
                         const GenerationParams& params) = 0;
};

struct BatchTelemetry {
  int waves = 0;
  std::vector<double> dispatch_times;  // one entry per attempt, retries included
};

// Completes every exchange, preserving input order. Items are dispatched in
// waves of batch_size, paced so the dispatch rate stays at or under rps_cap,
// and each failing item is retried max_retries times with exponential backoff
// (base 1s, factor 2; jitter only on the real clock). Per-item failures are
// recorded in the item; Error{endpoint_unreachable} is thrown only when no
// request succeeded and every failure was transport-level.
std::vector<ChatExchange> complete_batch(std::vector<ChatExchange> requests,
                                         const GenerationParams& params,
                                         const GatewayConfig& config,
                                         ChatBackend& backend, Clock& clock,
                                         BatchTelemetry* telemetry = nullptr);

// Deterministic scripted backend. Script shape:
//   {"responses": {"<prompt_key>": "text" | ["seed-indexed", ...]},
//    "default": "text",                      (optional)
//    "failures": {"<prompt_key>": "timeout" | "rate_limited" | "http_500"}}
// Unknown prompts without a default fail with empty_response.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(nlohmann::json script, std::uint64_t seed = 0);
  static MockBackend from_file(const std::filesystem::path& path,
                               std::uint64_t seed = 0);

  void fail_correlation_ids(std::set<std::int64_t> ids,
                            FailureKind kind = FailureKind::timeout);

  Reply complete(std::int64_t correlation_id, const MessageList& prompt,
                 const GenerationParams& params) override;

 private:
  nlohmann::json script_;
  std::uint64_t seed_ = 0;
  std::set<std::int64_t> fail_ids_;
  FailureKind fail_kind_ = FailureKind::timeout;
};

// Talks the de facto chat-completions JSON shape to any conforming server:
// POST {model, messages, temperature, max_tokens}, reads the first choice's
// message content. The bearer token comes from the env var named in config.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(GatewayConfig config);

  Reply complete(std::int64_t correlation_id, const MessageList& prompt,
                 const GenerationParams& params) override;

 private:
  GatewayConfig config_;
  std::string scheme_host_;
  std::string path_;
  std::string api_key_;
};

}  // namespace phytosub::gateway
