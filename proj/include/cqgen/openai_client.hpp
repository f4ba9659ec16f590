#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include "json.hpp"

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/errors.hpp"

namespace cqgen {

namespace detail {

struct ParsedEndpoint {
  std::string base;         // scheme://host[:port]
  std::string path_prefix;  // "" or "/v1" style, no trailing slash
};

inline ParsedEndpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint must start with http:// or https://: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw ConfigError("unsupported endpoint scheme \"" + scheme + "\"");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == scheme_end + 3)
    throw ConfigError("endpoint has an empty host: " + url);
  ParsedEndpoint out;
  if (path_start == std::string::npos) {
    out.base = url;
    return out;
  }
  out.base = url.substr(0, path_start);
  out.path_prefix = url.substr(path_start);
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
    out.path_prefix.pop_back();
  return out;
}

inline std::string body_excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax);
}

}  // namespace detail

// Chat-completions HTTP backend. Transport errors, HTTP 429, and HTTP 5xx
// are retried on the configured backoff schedule; other non-2xx statuses
// fail immediately with the status and a body excerpt.
class OpenAiClient final : public ChatBackend {
 public:
  explicit OpenAiClient(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    endpoint_ = detail::parse_endpoint(config_.endpoint);
    if (const char* key = std::getenv(config_.api_key_env.c_str()))
      api_key_ = key;
  }

  std::string complete(const ChatSession& session,
                       const std::string& user_text) override {
    const std::string body = request_body(session, user_text);
    const int max_attempts = config_.retry.max_attempts;
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
      int delay_ms = config_.retry.delay_before_attempt(attempt);
      if (delay_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));

      httplib::Client client(endpoint_.base);
      client.set_connection_timeout(10, 0);
      client.set_read_timeout(120, 0);
      client.set_write_timeout(30, 0);
      httplib::Headers headers;
      if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

      auto res = client.Post(endpoint_.path_prefix + "/chat/completions",
                             headers, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 200 && res->status < 300)
        return extract_content(res->body);
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status) + ": " +
                     detail::body_excerpt(res->body);
        continue;
      }
      throw ApiError("chat request rejected with HTTP " +
                         std::to_string(res->status),
                     res->status, detail::body_excerpt(res->body));
    }
    throw BackendError("chat request failed after " +
                           std::to_string(max_attempts) +
                           " attempts; last error: " + last_error,
                       max_attempts);
  }

  std::string kind() const override { return "remote"; }

  const BackendConfig& config() const { return config_; }

 private:
  std::string request_body(const ChatSession& session,
                           const std::string& user_text) const {
    nlohmann::ordered_json req;
    req["model"] = config_.model;
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    for (const Message& m : session.messages()) {
      nlohmann::ordered_json msg;
      msg["role"] = to_string(m.role);
      msg["content"] = m.content;
      messages.push_back(std::move(msg));
    }
    nlohmann::ordered_json user;
    user["role"] = "user";
    user["content"] = user_text;
    messages.push_back(std::move(user));
    req["messages"] = std::move(messages);
    req["temperature"] = config_.temperature;
    req["max_tokens"] = config_.max_output_tokens;
    return req.dump();
  }

  static std::string extract_content(const std::string& body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded())
      throw BackendError("chat response is not valid JSON: " +
                         detail::body_excerpt(body));
    if (!doc.is_object() || !doc.contains("choices") ||
        !doc["choices"].is_array() || doc["choices"].empty())
      throw BackendError("chat response has no choices: " +
                         detail::body_excerpt(body));
    const auto& first = doc["choices"][0];
    if (!first.is_object() || !first.contains("message") ||
        !first["message"].is_object() || !first["message"].contains("content"))
      throw BackendError("chat response choice has no message content: " +
                         detail::body_excerpt(body));
    const auto& content = first["message"]["content"];
    if (content.is_null()) return "";
    if (!content.is_string())
      throw BackendError("chat response content is not a string: " +
                         detail::body_excerpt(body));
    return content.get<std::string>();
  }

  BackendConfig config_;
  detail::ParsedEndpoint endpoint_;
  std::string api_key_;
};

}  // namespace cqgen
