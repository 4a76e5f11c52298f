#include "coheval/llm_client.hpp"

#include <httplib.h>

namespace coheval::llm {
namespace {

// Splits "https://host:port/v1" into ("https://host:port", "/v1").
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = base_url.find('/', host_start);
  if (path_start == std::string::npos) return {base_url, ""};
  auto prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

class HttpTransport final : public Transport {
 public:
  HttpReply post_json(const std::string& base_url, const std::string& path, const std::string& body,
                      const std::map<std::string, std::string>& headers,
                      std::chrono::milliseconds timeout) override {
    const auto [origin, prefix] = split_base_url(base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers request_headers;
    for (const auto& [name, value] : headers) request_headers.emplace(name, value);

    HttpReply reply;
    auto result = client.Post(prefix + path, request_headers, body, "application/json");
    if (!result) {
      reply.error = httplib::to_string(result.error());
      return reply;
    }
    reply.status = result->status;
    reply.body = result->body;
    return reply;
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttpTransport>(); }

}  // namespace coheval::llm
