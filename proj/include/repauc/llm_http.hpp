#pragma once

// HTTP transport for ChatCompletionAdvisor. Requires cpp-httplib; https
// URLs need CPPHTTPLIB_OPENSSL_SUPPORT and OpenSSL at link time.

#include "repauc/llm_advisor.hpp"

#include <httplib.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace repauc {

inline constexpr const char* kEnvLlmUrl = "REPAUC_LLM_URL";
inline constexpr const char* kEnvLlmApiKey = "REPAUC_LLM_API_KEY";
inline constexpr const char* kEnvLlmModel = "REPAUC_LLM_MODEL";

class HttpChatTransport final : public ChatTransport {
public:
  explicit HttpChatTransport(const EndpointConfig& endpoint)
      : client_(endpoint.base_url), path_(endpoint.path) {
    if (!client_.is_valid()) throw TransportError("invalid endpoint URL '" + endpoint.base_url + "'");
    const auto ms = endpoint.timeout.count();
    client_.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    client_.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    client_.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
    if (!endpoint.api_key.empty()) client_.set_bearer_token_auth(endpoint.api_key);
  }

  std::string post_json(const std::string& body) override {
    auto res = client_.Post(path_, body, "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    return res->body;
  }

private:
  httplib::Client client_;
  std::string path_;
};

/// Endpoint settings from REPAUC_LLM_URL, REPAUC_LLM_API_KEY and the
/// optional REPAUC_LLM_MODEL, layered over `base`.
inline EndpointConfig endpoint_from_env(EndpointConfig base = {}) {
  const char* url = std::getenv(kEnvLlmUrl);
  const char* key = std::getenv(kEnvLlmApiKey);
  if (!url || !*url)
    throw AdvisorError(std::string("live LLM bidding needs ") + kEnvLlmUrl +
                       " (e.g. https://api.openai.com) and " + kEnvLlmApiKey + " to be set");
  if (!key || !*key) throw AdvisorError(std::string("live LLM bidding needs ") + kEnvLlmApiKey + " to be set");
  base.base_url = url;
  base.api_key = key;
  if (const char* model = std::getenv(kEnvLlmModel); model && *model) base.model_name = model;
  return base;
}

inline std::unique_ptr<BidAdvisor> make_http_advisor(const EndpointConfig& endpoint) {
  return std::make_unique<ChatCompletionAdvisor>(endpoint, std::make_unique<HttpChatTransport>(endpoint));
}

} // namespace repauc
