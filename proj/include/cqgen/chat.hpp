#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqgen/errors.hpp"
#include "cqgen/sha256.hpp"

namespace cqgen {

enum class Role { system, user, assistant };

inline std::string_view to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "unknown";
}

struct Message {
  Role role;
  std::string content;
};

// One growing chat transcript. Messages strictly alternate user/assistant
// after the optional leading system message; the tag names the logical
// stream (e.g. "pipeline", "ranking") so ordered scripted backends can
// replay per-stream queues.
class ChatSession {
 public:
  explicit ChatSession(std::string tag) : tag_(std::move(tag)) {}

  ChatSession(std::string tag, std::string system_prompt)
      : tag_(std::move(tag)) {
    if (!system_prompt.empty())
      messages_.push_back({Role::system, std::move(system_prompt)});
  }

  const std::string& tag() const { return tag_; }
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t size() const { return messages_.size(); }

  bool has_system() const {
    return !messages_.empty() && messages_.front().role == Role::system;
  }

  // Number of completed user->assistant exchanges.
  std::size_t turns() const {
    std::size_t n = 0;
    for (const Message& m : messages_)
      if (m.role == Role::assistant) ++n;
    return n;
  }

  void append_user(std::string text) {
    if (text.empty()) throw UsageError("user message must be non-empty");
    if (!messages_.empty() && messages_.back().role == Role::user)
      throw UsageError("consecutive user messages are not allowed");
    messages_.push_back({Role::user, std::move(text)});
  }

  void append_assistant(std::string text) {
    if (text.empty()) throw UsageError("assistant message must be non-empty");
    if (messages_.empty() || messages_.back().role != Role::user)
      throw UsageError("assistant message requires a pending user message");
    messages_.push_back({Role::assistant, std::move(text)});
  }

 private:
  std::string tag_;
  std::vector<Message> messages_;
};

// Stable digest of (history, next user text). Length-prefixing each field
// keeps distinct transcripts from colliding via concatenation ambiguity.
inline std::string digest_history(const ChatSession& session,
                                  std::string_view user_text) {
  Sha256 h;
  for (const Message& m : session.messages()) {
    std::string_view role = to_string(m.role);
    h.update(role);
    h.update(":");
    h.update(std::to_string(m.content.size()));
    h.update(":");
    h.update(m.content);
    h.update(";");
  }
  h.update("U");
  h.update(std::to_string(user_text.size()));
  h.update(":");
  h.update(user_text);
  return h.hex_digest();
}

}  // namespace cqgen
