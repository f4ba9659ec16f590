#pragma once

#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/errors.hpp"

namespace cqgen {

// Deterministic offline backend. Replies come from either
//   - a digest map: transcript digest -> reply (order-independent, safe
//     under any parallelism), or
//   - ordered queues keyed by session tag: replies are consumed
//     front-to-back per tag (only meaningful at parallelism 1).
// Digest entries win over queue entries when both could answer.
class ScriptedBackend final : public ChatBackend {
  using DigestMap = std::map<std::string, std::string>;
  using QueueMap = std::map<std::string, std::deque<std::string>>;

 public:
  static ScriptedBackend from_digest_map(DigestMap replies) {
    return ScriptedBackend(std::move(replies), QueueMap{});
  }

  static ScriptedBackend from_ordered(
      const std::vector<std::pair<std::string, std::string>>& tagged) {
    QueueMap queues;
    for (const auto& [tag, reply] : tagged) queues[tag].push_back(reply);
    return ScriptedBackend(DigestMap{}, std::move(queues));
  }

  // Script file: one JSON array whose records are either
  // {"digest": ..., "reply": ...} or {"stage_tag": ..., "reply": ...}.
  static ScriptedBackend from_script_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open script file: " + path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("script file " + path + ": " + e.what());
    }
    if (!doc.is_array())
      throw ConfigError("script file " + path + ": expected a JSON array");
    DigestMap by_digest;
    QueueMap queues;
    for (const auto& rec : doc) {
      if (!rec.is_object() || !rec.contains("reply") ||
          !rec["reply"].is_string())
        throw ConfigError("script file " + path +
                          ": every record needs a string \"reply\"");
      std::string reply = rec["reply"].get<std::string>();
      if (rec.contains("digest") && rec["digest"].is_string()) {
        by_digest[rec["digest"].get<std::string>()] = std::move(reply);
      } else if (rec.contains("stage_tag") && rec["stage_tag"].is_string()) {
        queues[rec["stage_tag"].get<std::string>()].push_back(
            std::move(reply));
      } else {
        throw ConfigError("script file " + path +
                          ": record needs \"digest\" or \"stage_tag\"");
      }
    }
    return ScriptedBackend(std::move(by_digest), std::move(queues));
  }

  // Replay store: JSON-lines of {"digest": ..., "reply": ...} as appended
  // by RecordingBackend. Later records win on digest collision.
  static ScriptedBackend from_replay_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open replay store: " + path);
    DigestMap by_digest;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("replay store " + path + " line " +
                          std::to_string(line_no) + ": " + e.what());
      }
      if (!rec.is_object() || !rec.contains("digest") ||
          !rec["digest"].is_string() || !rec.contains("reply") ||
          !rec["reply"].is_string())
        throw ConfigError("replay store " + path + " line " +
                          std::to_string(line_no) +
                          ": expected {\"digest\", \"reply\"}");
      by_digest[rec["digest"].get<std::string>()] =
          rec["reply"].get<std::string>();
    }
    return ScriptedBackend(std::move(by_digest), QueueMap{});
  }

  std::string complete(const ChatSession& session,
                       const std::string& user_text) override {
    const std::string digest = digest_history(session, user_text);
    std::lock_guard<std::mutex> lock(mu_);
    auto hit = by_digest_.find(digest);
    if (hit != by_digest_.end()) return hit->second;
    auto queue = queues_.find(session.tag());
    if (queue != queues_.end() && !queue->second.empty()) {
      std::string reply = std::move(queue->second.front());
      queue->second.pop_front();
      return reply;
    }
    throw BackendError("scripted backend has no reply for tag '" +
                       session.tag() + "' digest " + digest);
  }

  std::string kind() const override { return "scripted"; }

  // Unconsumed ordered replies (digest entries are reusable, not counted).
  std::size_t remaining() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t n = 0;
    for (const auto& [tag, q] : queues_) n += q.size();
    return n;
  }

 private:
  ScriptedBackend(DigestMap by_digest, QueueMap queues)
      : by_digest_(std::move(by_digest)), queues_(std::move(queues)) {}

  mutable std::mutex mu_;
  DigestMap by_digest_;
  QueueMap queues_;
};

// Wraps any backend and appends every exchange to a JSON-lines replay
// store, so a live (or ordered-script) run can later be replayed
// digest-keyed at any parallelism.
class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(ChatBackend& inner, const std::string& store_path)
      : inner_(inner), out_(store_path, std::ios::binary | std::ios::app) {
    if (!out_)
      throw ConfigError("cannot open replay store for append: " + store_path);
  }

  std::string complete(const ChatSession& session,
                       const std::string& user_text) override {
    std::string reply = inner_.complete(session, user_text);
    nlohmann::json rec{{"digest", digest_history(session, user_text)},
                       {"reply", reply}};
    std::lock_guard<std::mutex> lock(mu_);
    out_ << rec.dump() << '\n';
    out_.flush();
    return reply;
  }

  std::string kind() const override { return inner_.kind() + "+recording"; }

 private:
  ChatBackend& inner_;
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace cqgen
