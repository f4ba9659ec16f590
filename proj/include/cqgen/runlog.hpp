#pragma once

#include <ctime>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "cqgen/errors.hpp"

namespace cqgen {

// Append-only JSON-lines audit log. One record per event:
//   {"intervention_id", "stage", "event", "payload", "timestamp"}
// A default-constructed log is disabled and swallows events; all writes
// are serialized through one mutex so workers can share the instance.
class RunLog {
 public:
  RunLog() = default;

  explicit RunLog(const std::string& path)
      : owned_(std::make_unique<std::ofstream>(path, std::ios::binary)) {
    if (!*owned_) throw ConfigError("cannot open run log for write: " + path);
    sink_ = owned_.get();
  }

  // Non-owning sink, used by tests to capture events in memory.
  explicit RunLog(std::ostream* sink) : sink_(sink) {}

  bool enabled() const { return sink_ != nullptr; }

  void event(std::string_view intervention_id, std::string_view stage,
             std::string_view event_name, nlohmann::ordered_json payload) {
    if (!sink_) return;
    nlohmann::ordered_json rec;
    rec["intervention_id"] = std::string(intervention_id);
    rec["stage"] = std::string(stage);
    rec["event"] = std::string(event_name);
    rec["payload"] = std::move(payload);
    rec["timestamp"] = now_utc();
    std::lock_guard<std::mutex> lock(mu_);
    *sink_ << rec.dump() << '\n';
    sink_->flush();
  }

 private:
  static std::string now_utc() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::unique_ptr<std::ofstream> owned_;
  std::ostream* sink_ = nullptr;
  std::mutex mu_;
};

}  // namespace cqgen
