#pragma once

#include <string>
#include <vector>

#include "cqgen/chat.hpp"
#include "cqgen/errors.hpp"

namespace cqgen {

// Delay schedule for retryable backend failures. Attempt n (1-based) waits
// backoff_ms[n-1] before being issued; the schedule must not decrease.
struct RetryPolicy {
  int max_attempts = 3;
  std::vector<int> backoff_ms = {0, 250, 1000};

  void validate() const {
    if (max_attempts < 1) throw ConfigError("retry: max_attempts must be >= 1");
    if (backoff_ms.size() < static_cast<std::size_t>(max_attempts))
      throw ConfigError("retry: backoff schedule shorter than max_attempts");
    for (std::size_t i = 0; i < backoff_ms.size(); ++i) {
      if (backoff_ms[i] < 0) throw ConfigError("retry: negative backoff");
      if (i > 0 && backoff_ms[i] < backoff_ms[i - 1])
        throw ConfigError("retry: backoff schedule must not decrease");
    }
  }

  int delay_before_attempt(int attempt) const {
    return backoff_ms[static_cast<std::size_t>(attempt - 1)];
  }
};

struct BackendConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string api_key_env = "OPENAI_API_KEY";
  RetryPolicy retry;

  void validate() const {
    if (endpoint.empty()) throw ConfigError("backend: endpoint must be set");
    if (model.empty()) throw ConfigError("backend: model must be set");
    if (max_output_tokens < 1)
      throw ConfigError("backend: max_output_tokens must be >= 1");
    if (temperature < 0.0 || temperature > 2.0)
      throw ConfigError("backend: temperature out of range [0, 2]");
    retry.validate();
  }
};

// A chat-completion provider: given the session so far plus the next user
// message, produce the assistant reply. Implementations must be safe for
// concurrent calls from multiple workers.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatSession& session,
                               const std::string& user_text) = 0;
  virtual std::string kind() const = 0;
};

// Issues one exchange on the session. The reply is obtained before the
// session is touched, so a throwing backend leaves the session unchanged.
inline std::string send(ChatSession& session, const std::string& user_text,
                        ChatBackend& backend) {
  if (user_text.empty()) throw UsageError("send: user_text must be non-empty");
  std::string reply = backend.complete(session, user_text);
  if (reply.empty())
    throw EmptyReplyError("backend '" + backend.kind() +
                          "' returned an empty reply");
  session.append_user(user_text);
  session.append_assistant(reply);
  return reply;
}

}  // namespace cqgen
