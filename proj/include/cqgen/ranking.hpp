#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/config.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/generation.hpp"
#include "cqgen/prompts.hpp"
#include "cqgen/runlog.hpp"
#include "cqgen/turns.hpp"

namespace cqgen {

enum class RepairKind { invalid_id_dropped, duplicate_dropped, backfilled };

inline std::string_view to_string(RepairKind kind) {
  switch (kind) {
    case RepairKind::invalid_id_dropped:
      return "invalid_id_dropped";
    case RepairKind::duplicate_dropped:
      return "duplicate_dropped";
    case RepairKind::backfilled:
      return "backfilled";
  }
  return "unknown";
}

struct RepairEvent {
  RepairKind kind;
  int id;

  bool operator==(const RepairEvent& other) const {
    return kind == other.kind && id == other.id;
  }
};

struct RankingResult {
  std::vector<int> requested_ids;          // as parsed, unrepaired
  std::vector<CriticalQuestion> selected;  // final order, repaired
  std::vector<RepairEvent> repairs;
};

// Extracts the first bracketed integer list from the reply. Non-integer
// elements make a candidate list non-conforming; negatives survive parsing
// (selection repairs them as invalid ids).
inline std::optional<std::vector<int>> parse_ranking(
    std::string_view reply_text) {
  return detail::scan_for_list<int>(
      reply_text,
      [](const nlohmann::json& arr) -> std::optional<std::vector<int>> {
        std::vector<int> ids;
        for (const auto& el : arr) {
          if (!el.is_number_integer()) return std::nullopt;
          long long v = el.get<long long>();
          if (v < -1000000 || v > 1000000) return std::nullopt;
          ids.push_back(static_cast<int>(v));
        }
        return ids;
      });
}

// The ranking user prompt: intervention, blank line, one "id. text" line
// per candidate, then the (tuned or plain) instruction block.
inline std::string build_ranking_prompt(
    const std::string& intervention_text,
    const std::vector<CriticalQuestion>& candidates, bool tuned = true) {
  if (intervention_text.empty())
    throw UsageError("build_ranking_prompt: intervention text must be non-empty");
  if (candidates.empty())
    throw UsageError("build_ranking_prompt: candidates must be non-empty");
  std::string block = intervention_text + "\n\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0) block += "\n";
    block += std::to_string(candidates[i].id) + ". " + candidates[i].text;
  }
  return render_prompt(tuned ? prompts::kRankingTuned : prompts::kRankingPlain,
                       {{"intervention", block}});
}

// Deterministic repair of a model-provided ranking: walk ranked_ids keeping
// the first occurrence of each valid candidate id until min(k, n) are
// chosen (later entries are ignored once the quota is met), then backfill
// with unchosen candidates in ascending id order. Every dropped invalid id,
// dropped duplicate, and backfill is recorded.
inline RankingResult select_top_k(
    const std::vector<CriticalQuestion>& candidates,
    const std::vector<int>& ranked_ids, int k = 3) {
  if (k < 1) throw UsageError("select_top_k: k must be >= 1");
  std::set<int> candidate_ids;
  for (const CriticalQuestion& q : candidates) {
    if (!candidate_ids.insert(q.id).second)
      throw UsageError("select_top_k: duplicate candidate id " +
                       std::to_string(q.id));
  }

  auto find_candidate = [&](int id) -> const CriticalQuestion* {
    for (const CriticalQuestion& q : candidates)
      if (q.id == id) return &q;
    return nullptr;
  };

  const std::size_t want =
      std::min(static_cast<std::size_t>(k), candidates.size());
  RankingResult result;
  result.requested_ids = ranked_ids;
  std::set<int> chosen;
  for (int id : ranked_ids) {
    if (result.selected.size() >= want) break;
    if (candidate_ids.count(id) == 0) {
      result.repairs.push_back({RepairKind::invalid_id_dropped, id});
      continue;
    }
    if (!chosen.insert(id).second) {
      result.repairs.push_back({RepairKind::duplicate_dropped, id});
      continue;
    }
    result.selected.push_back(*find_candidate(id));
  }
  std::vector<const CriticalQuestion*> remaining;
  for (const CriticalQuestion& q : candidates)
    if (chosen.count(q.id) == 0) remaining.push_back(&q);
  std::sort(remaining.begin(), remaining.end(),
            [](const CriticalQuestion* a, const CriticalQuestion* b) {
              return a->id < b->id;
            });
  for (const CriticalQuestion* q : remaining) {
    if (result.selected.size() >= want) break;
    result.selected.push_back(*q);
    result.repairs.push_back({RepairKind::backfilled, q->id});
  }
  return result;
}

// Ranking always runs in a fresh session (both prompt modes), so each
// ranking transcript is exactly system + user + assistant. A parse failure
// retries once on another fresh session, then falls back to identity order.
inline RankingResult run_ranking(const std::string& intervention_text,
                                 const std::vector<CriticalQuestion>& candidates,
                                 const RunConfig& config, ChatBackend& backend,
                                 RunLog& log, std::string_view intervention_id,
                                 int& warnings) {
  if (candidates.empty())
    throw UsageError("run_ranking: candidates must be non-empty");
  std::string prompt =
      build_ranking_prompt(intervention_text, candidates, config.tuned_ranking);

  std::vector<int> ranked;
  for (int attempt = 1;; ++attempt) {
    ChatSession session("ranking", config.system_prompt);
    std::string reply = logged_send(session, prompt, backend, log,
                                    intervention_id, "ranking", 0);
    log.event(intervention_id, "ranking", "session_complete",
              nlohmann::ordered_json{{"messages", session.size()},
                                     {"turns", session.turns()}});
    std::optional<std::vector<int>> ids = parse_ranking(reply);
    if (ids) {
      ranked = *ids;
      break;
    }
    log.event(intervention_id, "ranking", "parse_warning",
              nlohmann::ordered_json{{"turn", 0},
                                     {"attempt", attempt},
                                     {"raw", reply}});
    ++warnings;
    if (attempt == 2) break;  // identity-order fallback: empty ranked list
  }

  RankingResult result = select_top_k(candidates, ranked, config.rank_k);
  for (const RepairEvent& r : result.repairs) {
    log.event(intervention_id, "ranking", "repair",
              nlohmann::ordered_json{{"kind", std::string(to_string(r.kind))},
                                     {"id", r.id}});
  }
  return result;
}

}  // namespace cqgen
