#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "coheval/llm_client.hpp"

namespace coheval::testing {

struct MockReply {
  int status = 200;
  std::string body;
};

// Wraps assistant text in an OpenAI-style chat.completion body.
std::string completion_body(const std::string& content, const std::string& finish_reason = "stop");

// Content of the last user message in a wire request.
std::string last_user_message(const nlohmann::json& request);

using MockHandler = std::function<MockReply(const nlohmann::json& request)>;

// Local HTTP server answering POST <prefix>/chat/completions. Records the
// number of calls, the calls per distinct body and the peak number of
// requests being handled at once.
class MockServer {
 public:
  explicit MockServer(MockHandler handler, std::chrono::milliseconds delay = std::chrono::milliseconds(0));
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  std::string base_url() const;  // http://127.0.0.1:<port>/v1
  std::size_t calls() const { return calls_.load(); }
  int peak_in_flight() const { return peak_.load(); }
  std::map<std::string, int> calls_per_body() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  MockHandler handler_;
  std::chrono::milliseconds delay_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  mutable std::mutex mutex_;
  std::map<std::string, int> per_body_;
  std::thread thread_;
  int port_ = 0;
};

// In-process Transport; same bookkeeping as MockServer minus the socket.
class FakeTransport : public llm::Transport {
 public:
  explicit FakeTransport(MockHandler handler) : handler_(std::move(handler)) {}

  llm::HttpReply post_json(const std::string& base_url, const std::string& path, const std::string& body,
                           const std::map<std::string, std::string>& headers,
                           std::chrono::milliseconds timeout) override;

  std::size_t calls() const { return calls_.load(); }
  std::map<std::string, std::string> last_headers() const;
  std::string last_path() const;

 private:
  MockHandler handler_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::map<std::string, std::string> last_headers_;
  std::string last_path_;
};

// Endpoint config for tests: no auth, no real backoff waits.
llm::EndpointConfig test_endpoint(const std::string& base_url = "http://mock.invalid/v1",
                                  const std::string& model = "mock-model", int max_in_flight = 4);

}  // namespace coheval::testing
