#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/runlog.hpp"

namespace cqgen {

// One exchange with request/reply audit events. The request's "messages"
// field is the size of the message list actually sent (history + the new
// user message), which the mode-contract checks assert on.
inline std::string logged_send(ChatSession& session,
                               const std::string& user_text,
                               ChatBackend& backend, RunLog& log,
                               std::string_view intervention_id,
                               std::string_view stage, int turn_index) {
  log.event(intervention_id, stage, "request",
            nlohmann::ordered_json{{"turn", turn_index},
                                   {"messages", session.size() + 1},
                                   {"text", user_text}});
  std::string reply = send(session, user_text, backend);
  log.event(intervention_id, stage, "reply",
            nlohmann::ordered_json{{"turn", turn_index},
                                   {"chars", reply.size()},
                                   {"text", reply}});
  return reply;
}

}  // namespace cqgen
