#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coheval/errors.hpp"

namespace coheval::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

struct Message {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

struct ChatRequest {
  std::string model_name;
  std::vector<Message> messages;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 256;
  // Sent as top-level body fields, e.g. {"repetition_penalty": 1.1}.
  std::map<std::string, nlohmann::json> extra_params;
  // Distinguishes deliberate resamples of the same request in the cache.
  // Never sent over the wire; only mixed into the cache key when non-zero.
  int sample_index = 0;

  // Throws UsageError on an empty message list, a last message that is not
  // from the user, or out-of-range decoding parameters.
  void validate() const;

  // OpenAI-compatible /chat/completions request body.
  nlohmann::json to_wire() const;
};

enum class FinishReason { Stop, Length, ContentFilter, Other };

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;
};

struct ChatResult {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  Usage usage;
  bool from_cache = false;
  std::int64_t latency_ms = 0;
  int attempts = 0;
};

// Throws TransportError when the body lacks choices[0].message.content.
ChatResult parse_chat_response(const nlohmann::json& body);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  bool jitter = true;
};

// Delay before retry number `retry` (0-based). With jitter the delay is drawn
// from [d/2, d] for d = base * factor^retry, which keeps successive delays
// nondecreasing whenever factor >= 2.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry, std::mt19937_64& rng);

bool is_retryable_status(int status);

struct EndpointConfig {
  std::string base_url;
  // Name of the environment variable holding the API key; empty = no auth.
  std::string api_key_env;
  std::string model_name;
  double timeout_s = 60.0;
  int max_attempts = 5;
  int max_in_flight = 4;
  std::chrono::milliseconds retry_base_delay{1000};

  RetryPolicy retry_policy() const;
};

struct HttpReply {
  // 0 when no HTTP response was received (connect failure, timeout).
  int status = 0;
  std::string body;
  std::string error;
};

// Minimal POST transport so tests and alternative stacks can stand in for
// the HTTP client.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post_json(const std::string& base_url, const std::string& path, const std::string& body,
                              const std::map<std::string, std::string>& headers,
                              std::chrono::milliseconds timeout) = 0;
};

// cpp-httplib backed transport; one connection per call.
std::shared_ptr<Transport> make_http_transport();

class HttpStatusError : public TransportError {
 public:
  HttpStatusError(int status, const std::string& message) : TransportError(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class RetryBudgetExhausted : public TransportError {
 public:
  using TransportError::TransportError;
};

class MalformedResponse : public TransportError {
 public:
  using TransportError::TransportError;
};

struct RawCompletion {
  nlohmann::json body;
  int attempts = 0;
  std::int64_t latency_ms = 0;
};

// Chat-completion client for one endpoint. Thread-safe; at most
// max_in_flight requests are outstanding at any moment across all threads
// sharing the client.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config, std::shared_ptr<Transport> transport = nullptr,
                      std::uint64_t jitter_seed = 0);

  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  ChatResult complete(const ChatRequest& request);
  RawCompletion complete_raw(const ChatRequest& request);

  const EndpointConfig& config() const { return config_; }
  std::size_t network_calls() const { return network_calls_.load(); }

 private:
  std::chrono::milliseconds next_delay(int retry);
  std::map<std::string, std::string> auth_headers() const;

  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

// Content-addressed store of raw endpoint replies:
// <root>/<first two hex chars>/<sha256>.json
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  // SHA-256 over the canonical JSON of (model_name, messages, temperature,
  // top_p, max_tokens, extra_params[, sample_index]).
  static std::string key(const ChatRequest& request);

  std::filesystem::path path_for(const std::string& key) const;

  // nullopt on miss; unreadable or corrupt entries are a miss plus a warning.
  std::optional<nlohmann::json> load(const std::string& key) const;
  void store(const std::string& key, const nlohmann::json& raw) const;

  const std::filesystem::path& root() const { return root_; }

  // Serializes work on one key so concurrent identical requests make a
  // single network call.
  std::shared_ptr<std::mutex> key_lock(const std::string& key) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex locks_mutex_;
  mutable std::map<std::string, std::weak_ptr<std::mutex>> locks_;
};

// Serves from `cache` when possible; otherwise calls the endpoint and stores
// the raw reply. A null cache always goes to the network.
ChatResult cached_complete(ChatClient& client, const ChatRequest& request, const ResponseCache* cache);

std::string sha256_hex(std::string_view data);

}  // namespace coheval::llm
