#include "coheval/llm_client.hpp"

#include "coheval/jsonl.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <thread>

namespace coheval::llm {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::System:
      return "system";
    case Role::User:
      return "user";
    case Role::Assistant:
      return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  throw DataError("invalid message role '" + std::string(s) + "'");
}

void to_json(json& j, const Message& m) { j = json{{"role", to_string(m.role)}, {"content", m.content}}; }

void from_json(const json& j, Message& m) {
  m.role = role_from_string(j.at("role").get<std::string>());
  m.content = j.at("content").get<std::string>();
}

void ChatRequest::validate() const {
  if (messages.empty()) throw UsageError("chat request has no messages");
  if (messages.back().role != Role::User) throw UsageError("last chat message must have role 'user'");
  if (!(temperature >= 0.0)) throw UsageError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw UsageError("top_p must be in (0, 1]");
  if (max_tokens <= 0) throw UsageError("max_tokens must be positive");
}

json ChatRequest::to_wire() const {
  json body{{"model", model_name},
            {"messages", messages},
            {"temperature", temperature},
            {"top_p", top_p},
            {"max_tokens", max_tokens}};
  for (const auto& [name, value] : extra_params) body[name] = value;
  return body;
}

ChatResult parse_chat_response(const json& body) {
  ChatResult result;
  try {
    const auto& choice = body.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    if (!content.is_string()) throw MalformedResponse("message.content is not a string");
    result.text = content.get<std::string>();
    const auto reason = choice.value("finish_reason", json("stop"));
    const auto reason_text = reason.is_string() ? reason.get<std::string>() : std::string("stop");
    if (reason_text == "stop") {
      result.finish_reason = FinishReason::Stop;
    } else if (reason_text == "length") {
      result.finish_reason = FinishReason::Length;
    } else if (reason_text == "content_filter") {
      result.finish_reason = FinishReason::ContentFilter;
    } else {
      result.finish_reason = FinishReason::Other;
    }
    if (auto it = body.find("usage"); it != body.end() && it->is_object()) {
      result.usage.prompt_tokens = it->value("prompt_tokens", std::int64_t{0});
      result.usage.completion_tokens = it->value("completion_tokens", std::int64_t{0});
      result.usage.total_tokens = it->value("total_tokens", std::int64_t{0});
    }
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("malformed chat completion: ") + e.what());
  }
  return result;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry, std::mt19937_64& rng) {
  const double full = static_cast<double>(policy.base_delay.count()) * std::pow(policy.factor, retry);
  if (!policy.jitter) return std::chrono::milliseconds(static_cast<std::int64_t>(full));
  std::uniform_real_distribution<double> dist(full / 2.0, full);
  return std::chrono::milliseconds(static_cast<std::int64_t>(dist(rng)));
}

bool is_retryable_status(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

RetryPolicy EndpointConfig::retry_policy() const {
  RetryPolicy policy;
  policy.max_attempts = max_attempts;
  policy.base_delay = retry_base_delay;
  return policy;
}

ChatClient::ChatClient(EndpointConfig config, std::shared_ptr<Transport> transport, std::uint64_t jitter_seed)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_http_transport()),
      in_flight_(std::max(1, config_.max_in_flight)),
      rng_(jitter_seed) {
  if (config_.base_url.empty()) throw UsageError("endpoint base_url is empty");
  if (config_.max_attempts < 1) throw UsageError("endpoint max_attempts must be >= 1");
}

std::chrono::milliseconds ChatClient::next_delay(int retry) {
  std::lock_guard lock(rng_mutex_);
  return backoff_delay(config_.retry_policy(), retry, rng_);
}

std::map<std::string, std::string> ChatClient::auth_headers() const {
  std::map<std::string, std::string> headers;
  if (config_.api_key_env.empty()) return headers;
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw UsageError("environment variable " + config_.api_key_env + " (api_key_env) is not set");
  }
  headers["Authorization"] = std::string("Bearer ") + key;
  return headers;
}

RawCompletion ChatClient::complete_raw(const ChatRequest& request) {
  request.validate();
  const auto body = request.to_wire().dump();
  const auto headers = auth_headers();
  const auto timeout =
      std::chrono::milliseconds(static_cast<std::int64_t>(std::max(0.001, config_.timeout_s) * 1000.0));
  const auto started = std::chrono::steady_clock::now();

  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    HttpReply reply;
    in_flight_.acquire();
    try {
      ++network_calls_;
      reply = transport_->post_json(config_.base_url, "/chat/completions", body, headers, timeout);
    } catch (...) {
      in_flight_.release();
      throw;
    }
    in_flight_.release();

    if (reply.status >= 200 && reply.status < 300) {
      RawCompletion raw;
      try {
        raw.body = json::parse(reply.body);
      } catch (const json::parse_error& e) {
        throw MalformedResponse(std::string("endpoint returned invalid JSON: ") + e.what());
      }
      parse_chat_response(raw.body);
      raw.attempts = attempt;
      raw.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
              .count();
      return raw;
    }

    last_error = reply.status == 0 ? "transport failure: " + reply.error
                                   : "HTTP " + std::to_string(reply.status) + ": " + reply.body.substr(0, 200);
    if (!is_retryable_status(reply.status)) {
      throw HttpStatusError(reply.status, config_.base_url + ": " + last_error);
    }
    if (attempt < config_.max_attempts) {
      spdlog::debug("{}: attempt {} failed ({}); retrying", config_.base_url, attempt, last_error);
      std::this_thread::sleep_for(next_delay(attempt - 1));
    }
  }
  throw RetryBudgetExhausted(config_.base_url + ": gave up after " + std::to_string(config_.max_attempts) +
                             " attempts; last error: " + last_error);
}

ChatResult ChatClient::complete(const ChatRequest& request) {
  auto raw = complete_raw(request);
  auto result = parse_chat_response(raw.body);
  result.attempts = raw.attempts;
  result.latency_ms = raw.latency_ms;
  return result;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0f]);
  }
  return out;
}

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

std::string ResponseCache::key(const ChatRequest& request) {
  json canonical{{"model_name", request.model_name},
                 {"messages", request.messages},
                 {"temperature", request.temperature},
                 {"top_p", request.top_p},
                 {"max_tokens", request.max_tokens},
                 {"extra_params", request.extra_params}};
  if (request.sample_index != 0) canonical["sample_index"] = request.sample_index;
  return sha256_hex(canonical.dump());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return root_ / key.substr(0, 2) / (key + ".json");
}

std::optional<json> ResponseCache::load(const std::string& key) const {
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const std::exception& e) {
    spdlog::warn("cache entry {} is corrupt ({}); treating as a miss", path.string(), e.what());
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const json& raw) const {
  write_file_atomic(path_for(key), raw.dump());
}

std::shared_ptr<std::mutex> ResponseCache::key_lock(const std::string& key) const {
  std::lock_guard guard(locks_mutex_);
  std::erase_if(locks_, [](const auto& entry) { return entry.second.expired(); });
  auto& slot = locks_[key];
  auto lock = slot.lock();
  if (!lock) {
    lock = std::make_shared<std::mutex>();
    slot = lock;
  }
  return lock;
}

ChatResult cached_complete(ChatClient& client, const ChatRequest& request, const ResponseCache* cache) {
  if (cache == nullptr) return client.complete(request);
  request.validate();
  const auto key = ResponseCache::key(request);
  const auto lock = cache->key_lock(key);
  std::lock_guard guard(*lock);
  if (auto hit = cache->load(key)) {
    try {
      auto result = parse_chat_response(*hit);
      result.from_cache = true;
      return result;
    } catch (const MalformedResponse& e) {
      spdlog::warn("cache entry {} is not a chat completion ({}); treating as a miss",
                   cache->path_for(key).string(), e.what());
    }
  }
  auto raw = client.complete_raw(request);
  cache->store(key, raw.body);
  auto result = parse_chat_response(raw.body);
  result.attempts = raw.attempts;
  result.latency_ms = raw.latency_ms;
  return result;
}

}  // namespace coheval::llm
